use std::f64::consts::PI;

use crate::calculus::ScalarField;
use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::{group_mul, sphere_point, Point};
use crate::rng;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
const MAX_MOVES_PER_ROUND: usize = 8;

/// Candidate net on the closed unit ball and pattern-search refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BallSearchSpec {
    pub candidate_count: usize,
    pub refine_rounds: usize,
    pub seed: u64,
}

impl Default for BallSearchSpec {
    fn default() -> Self {
        BallSearchSpec { candidate_count: 512, refine_rounds: 20, seed: 0 }
    }
}

impl BallSearchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.candidate_count < 8 {
            return Err(Error::invalid("ball search needs at least 8 candidates"));
        }
        Ok(())
    }
}

/// Point `ρ_s(S(β, θ))` of the closed unit ball in shell coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetPoint {
    pub s: f64,
    pub beta: f64,
    pub theta: f64,
}

impl NetPoint {
    pub fn point(&self) -> Point {
        sphere_point(self.beta, self.theta).dilate(self.s)
    }

    fn clamped(mut self) -> Self {
        self.s = self.s.clamp(0.0, 1.0);
        self.beta = self.beta.clamp(-0.5 * PI, 0.5 * PI);
        self
    }
}

/// Deterministic net of about `count` points in the closed unit ball,
/// closed under `w -> -w` (consecutive entries are antipodal pairs).
///
/// Half the points lie on the unit sphere, a quarter on the shell of
/// radius ¾, and an eighth each on the shells ½ and ¼. Each shell uses a
/// Fibonacci spiral on the upper hemisphere mapped to latitude
/// `β = asin(u_z)`, rotated in longitude by an angle drawn from `seed`.
pub fn candidate_net(count: usize, seed: u64) -> Vec<NetPoint> {
    let count = count.max(8);
    let shells = [(1.0, count / 2), (0.75, count / 4), (0.5, count / 8)];
    let used: usize = shells.iter().map(|s| s.1).sum();
    let rot = 2.0 * PI * rng::unit_from_seed(seed);
    let mut out = Vec::with_capacity(count + 4);
    for (s, n) in shells.into_iter().chain(std::iter::once((0.25, count - used))) {
        let m = n.div_ceil(2).max(1);
        for i in 0..m {
            let uz = (i as f64 + 0.5) / m as f64;
            let beta = uz.asin();
            let theta = rot + GOLDEN_ANGLE * i as f64;
            out.push(NetPoint { s, beta, theta });
            out.push(NetPoint { s, beta: -beta, theta: theta + PI });
        }
    }
    out
}

/// Approximate extremum of an objective over the closed unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub value: f64,
    /// Maximizer/minimizer in the closed unit ball.
    pub arg: Point,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrema {
    pub min: Extremum,
    pub max: Extremum,
}

/// Minimizes and maximizes `g` over the closed unit ball: best net point,
/// then coordinate pattern search in `(s, β, θ)` with halving steps.
pub fn extremize<G>(g: G, spec: &BallSearchSpec) -> Result<Extrema>
where
    G: Fn(Point) -> Result<f64>,
{
    spec.validate()?;
    let net = candidate_net(spec.candidate_count, spec.seed);
    let mut vals = Vec::with_capacity(net.len());
    for c in &net {
        vals.push(g(c.point())?);
    }
    let mut imin = 0;
    let mut imax = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v < vals[imin] {
            imin = i;
        }
        if v > vals[imax] {
            imax = i;
        }
    }
    let min = refine(&g, net[imin], vals[imin], -1.0, spec.refine_rounds)?;
    let max = refine(&g, net[imax], vals[imax], 1.0, spec.refine_rounds)?;
    Ok(Extrema { min, max })
}

fn refine<G>(g: &G, start: NetPoint, v0: f64, sense: f64, rounds: usize) -> Result<Extremum>
where
    G: Fn(Point) -> Result<f64>,
{
    let mut best = start;
    let mut bv = v0;
    let mut step = [0.25, 0.25, 0.5];
    for _ in 0..rounds {
        for _ in 0..MAX_MOVES_PER_ROUND {
            let mut moved = None;
            for axis in 0..3 {
                for dir in [1.0, -1.0] {
                    let mut c = best;
                    match axis {
                        0 => c.s += dir * step[0],
                        1 => c.beta += dir * step[1],
                        _ => c.theta += dir * step[2],
                    }
                    let c = c.clamped();
                    let v = g(c.point())?;
                    if sense * (v - bv) > 0.0 && moved.is_none_or(|(_, mv)| sense * (v - mv) > 0.0) {
                        moved = Some((c, v));
                    }
                }
            }
            match moved {
                Some((c, v)) => {
                    best = c;
                    bv = v;
                }
                None => break,
            }
        }
        for s in &mut step {
            *s *= 0.5;
        }
    }
    Ok(Extremum { value: bv, arg: best.point() })
}

/// `½(inf + sup)` of `f` over `B_r(q)` with the located extrema.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinMaxAverage {
    pub value: f64,
    pub inf: f64,
    pub sup: f64,
    pub arg_inf: Point,
    pub arg_sup: Point,
}

pub fn deterministic_avg<F: ScalarField + ?Sized>(
    f: &F,
    r: f64,
    q: Point,
    search: &BallSearchSpec,
) -> Result<MinMaxAverage> {
    ensure_positive("search radius", r)?;
    let ex = extremize(|w| f.eval(group_mul(q, w.dilate(r))), search)?;
    Ok(MinMaxAverage {
        value: 0.5 * (ex.min.value + ex.max.value),
        inf: ex.min.value,
        sup: ex.max.value,
        arg_inf: group_mul(q, ex.min.arg.dilate(r)),
        arg_sup: group_mul(q, ex.max.arg.dilate(r)),
    })
}
