use std::f64::consts::PI;

use rand::Rng;

use crate::calculus::ScalarField;
use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::{group_mul, sample_unit_ball, sample_unit_disc, unit_ball_tensor_nodes, EllipsoidShape, Point};
use crate::rng;

/// How sample sets on the unit ball, disc and circle are produced.
///
/// Pseudo-random sets come in antithetic pairs `(w, -w)`, so `count` is
/// rounded up to an even number. Tensor sets are midpoint grids on the
/// bounding box with indicator weighting; identical specs always give
/// identical sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureSpec {
    PseudoRandom { count: usize, seed: u64 },
    TensorGrid { nodes_per_axis: usize },
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            QuadratureSpec::PseudoRandom { count: 0, .. } => {
                Err(Error::invalid("quadrature sample count must be positive"))
            }
            QuadratureSpec::TensorGrid { nodes_per_axis: 0 } => {
                Err(Error::invalid("tensor quadrature needs at least one node per axis"))
            }
            _ => Ok(()),
        }
    }

    /// Tensor grid keeping at least `count` nodes inside the unit ball.
    pub fn tensor_with_ball_nodes(count: usize) -> Self {
        QuadratureSpec::TensorGrid { nodes_per_axis: crate::hgroup::tensor_nodes_for_count(count) }
    }

    /// Sample set on the open unit Korányi ball.
    pub fn ball_nodes(&self) -> Result<Vec<Point>> {
        self.validate()?;
        Ok(match *self {
            QuadratureSpec::PseudoRandom { count, seed } => {
                let mut r = rng::stream(seed, 0xB411);
                antithetic(count, || sample_unit_ball(&mut r))
            }
            QuadratureSpec::TensorGrid { nodes_per_axis } => unit_ball_tensor_nodes(nodes_per_axis),
        })
    }

    /// Sample set on the open unit disc.
    pub fn disc_nodes(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        Ok(match *self {
            QuadratureSpec::PseudoRandom { count, seed } => {
                let mut r = rng::stream(seed, 0xD15C);
                antithetic(count, || {
                    let (a, b) = sample_unit_disc(&mut r);
                    Point::new(a, b, 0.0)
                })
                .into_iter()
                .map(|p| (p.x, p.y))
                .collect()
            }
            QuadratureSpec::TensorGrid { nodes_per_axis } => {
                let n = nodes_per_axis;
                let h = 2.0 / n as f64;
                let mut out = Vec::new();
                for j in 0..n {
                    let b = -1.0 + (j as f64 + 0.5) * h;
                    for i in 0..n {
                        let a = -1.0 + (i as f64 + 0.5) * h;
                        if a * a + b * b < 1.0 {
                            out.push((a, b));
                        }
                    }
                }
                out
            }
        })
    }

    /// Angles on the unit circle.
    pub fn circle_angles(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match *self {
            QuadratureSpec::PseudoRandom { count, seed } => {
                let mut r = rng::stream(seed, 0xC1C1);
                let pairs = count.div_ceil(2);
                let mut out = Vec::with_capacity(2 * pairs);
                for _ in 0..pairs {
                    let t: f64 = r.random_range(0.0..2.0 * PI);
                    out.push(t);
                    out.push(t + PI);
                }
                out
            }
            QuadratureSpec::TensorGrid { nodes_per_axis } => {
                let m = 4 * nodes_per_axis;
                (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect()
            }
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::PseudoRandom { count: 4096, seed: 0 }
    }
}

fn antithetic(count: usize, mut draw: impl FnMut() -> Point) -> Vec<Point> {
    let pairs = count.div_ceil(2);
    let mut out = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let w = draw();
        out.push(w);
        out.push(w.inv());
    }
    out
}

/// The stochastic averaging operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AvgKind {
    /// Horizontal circle `q + r(cos θ, sin θ, ½(x sin θ - y cos θ))`.
    A1,
    /// Solid horizontal ellipse through `q`.
    A2,
    /// Uniform average over `B_r(q)`.
    A3,
    /// Average over `B_r(q)` with density `Ψ(p) = |p_h|²/|p|_K²`.
    A3K,
}

/// `Ψ(w) = |w_h|² / |w|_K²`.
pub fn psi(w: Point) -> f64 {
    let g2 = w.gauge4().sqrt();
    if g2 > 0.0 {
        w.hor_norm_sq() / g2
    } else {
        0.0
    }
}

/// Mean of `f(q*ρ_r(w)) - f(q)` over `nodes`, plus `f(q)`. The difference
/// form reproduces constants exactly.
pub(crate) fn mean_over<F: ScalarField + ?Sized>(
    f: &F,
    q: Point,
    nodes: impl Iterator<Item = (Point, f64)>,
) -> Result<f64> {
    let f0 = f.eval(q)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, w) in nodes {
        num += w * (f.eval(p)? - f0);
        den += w;
    }
    if den <= 0.0 {
        return Err(Error::invalid("quadrature rule has no nodes"));
    }
    Ok(f0 + num / den)
}

/// Stochastic average of `f` of the given kind at scale `r` around `q`.
pub fn stochastic_avg<F: ScalarField + ?Sized>(
    kind: AvgKind,
    f: &F,
    r: f64,
    q: Point,
    quad: &QuadratureSpec,
) -> Result<f64> {
    ensure_positive("averaging radius", r)?;
    match kind {
        AvgKind::A1 => {
            let th = quad.circle_angles()?;
            mean_over(f, q, th.iter().map(|t| (group_mul(q, Point::new(r * t.cos(), r * t.sin(), 0.0)), 1.0)))
        }
        AvgKind::A2 => {
            let d = quad.disc_nodes()?;
            mean_over(f, q, d.iter().map(|&(a, b)| (group_mul(q, Point::new(r * a, r * b, 0.0)), 1.0)))
        }
        AvgKind::A3 => {
            let w = quad.ball_nodes()?;
            ball_mean(f, r, q, &w)
        }
        AvgKind::A3K => {
            let w = quad.ball_nodes()?;
            mean_over(f, q, w.iter().map(|&w| (group_mul(q, w.dilate(r)), psi(w))))
        }
    }
}

/// Uniform mean of `f` over `q*ρ_r(nodes)`.
pub fn ball_mean<F: ScalarField + ?Sized>(f: &F, r: f64, q: Point, nodes: &[Point]) -> Result<f64> {
    mean_over(f, q, nodes.iter().map(|&w| (group_mul(q, w.dilate(r)), 1.0)))
}

/// Uniform average of `f` over the ellipsoid `E(q, r; α, ν)`.
pub fn ellipsoid_avg<F: ScalarField + ?Sized>(
    f: &F,
    shape: &EllipsoidShape,
    q: Point,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let w = quad.ball_nodes()?;
    ellipsoid_mean(f, shape, q, &w)
}

pub fn ellipsoid_mean<F: ScalarField + ?Sized>(
    f: &F,
    shape: &EllipsoidShape,
    q: Point,
    nodes: &[Point],
) -> Result<f64> {
    mean_over(f, q, nodes.iter().map(|&w| (shape.place(q, w), 1.0)))
}
