use std::f64::consts::PI;

use crate::calculus::ScalarField;
use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::{group_mul, EllipsoidShape, Point};

use super::quadrature::{ball_mean, ellipsoid_mean, QuadratureSpec};
use super::search::{extremize, BallSearchSpec};

/// Tolerance on `3π/(2s²) + a² = p - 1`.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// Below this fraction of the radius the ellipsoid in the third operator is
/// replaced by the plain ball.
pub const DEGENERATE_HOR: f64 = 1e-12;

pub fn alpha_p(p: f64) -> f64 {
    3.0 * PI / (2.0 * (p - 2.0) + 3.0 * PI)
}

pub fn beta_p(p: f64) -> f64 {
    2.0 * (p - 2.0) / (2.0 * (p - 2.0) + 3.0 * PI)
}

/// `γ_p = ((p-2)/π)^{1/2}`.
pub fn gamma_p(p: f64) -> Result<f64> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::ExponentOutOfRange { p, range: "(2, inf)" });
    }
    Ok(((p - 2.0) / PI).sqrt())
}

/// Scaling exponents `(s_p, a_p)` of the ellipsoid operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dpp3Params {
    pub s: f64,
    pub a: f64,
}

impl Dpp3Params {
    /// Checks `3π/(2s²) + a² = p - 1` within [`CONSTRAINT_TOL`].
    pub fn new(p: f64, s: f64, a: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::ExponentOutOfRange { p, range: "(1, inf)" });
        }
        ensure_positive("s_p", s)?;
        ensure_positive("a_p", a)?;
        let lhs = 3.0 * PI / (2.0 * s * s) + a * a;
        if (lhs - (p - 1.0)).abs() > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation(format!("3π/(2s²) + a² = {lhs} but p - 1 = {}", p - 1.0)));
        }
        Ok(Dpp3Params { s, a })
    }

    /// `a = √((p-1)/2)`, `s = √(3π/(p-1))`, rejected when neither
    /// admissibility condition holds.
    pub fn default_for(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::ExponentOutOfRange { p, range: "(1, inf)" });
        }
        let d = Dpp3Params { s: (3.0 * PI / (p - 1.0)).sqrt(), a: (0.5 * (p - 1.0)).sqrt() };
        if !d.is_admissible() {
            return Err(Error::ConstraintViolation(format!(
                "default (s_p, a_p) = ({}, {}) is not admissible for p = {p}; give them explicitly",
                d.s, d.a
            )));
        }
        Ok(d)
    }

    /// `(a ≤ 1 and s·a > 1) or (a ≥ 1 and s > 1)`.
    pub fn is_admissible(&self) -> bool {
        (self.a <= 1.0 && self.s * self.a > 1.0) || (self.a >= 1.0 && self.s > 1.0)
    }

    /// Shape of the averaging set centered at `p` for the search center `q`
    /// and scale `r`, or `None` for the plain ball of radius `s·r`.
    pub fn shape_at(&self, q: Point, p: Point, r: f64) -> Result<Option<EllipsoidShape>> {
        let (dx, dy) = (p.x - q.x, p.y - q.y);
        let h = dx.hypot(dy);
        if h < DEGENERATE_HOR * r {
            return Ok(None);
        }
        let aspect = 1.0 + (self.a - 1.0) * (h * h) / (r * r);
        EllipsoidShape::new(self.s * r, aspect, Point::new(dx / h, dy / h, 0.0)).map(Some)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DppVariant {
    Dpp1,
    Dpp2,
    Dpp3(Dpp3Params),
}

impl DppVariant {
    pub fn check_p(&self, p: f64) -> Result<()> {
        match self {
            DppVariant::Dpp2 => gamma_p(p).map(|_| ()),
            DppVariant::Dpp1 if p > 1.0 && p.is_finite() => Ok(()),
            DppVariant::Dpp1 => Err(Error::ExponentOutOfRange { p, range: "(1, inf)" }),
            DppVariant::Dpp3(par) => Dpp3Params::new(p, par.s, par.a).map(|_| ()),
        }
    }
}

/// One application of the averaging operator of the chosen variant to `u`
/// at `q` and scale `eps`.
pub fn dpp_operator<F: ScalarField + ?Sized>(
    variant: &DppVariant,
    u: &F,
    eps: f64,
    q: Point,
    p: f64,
    quad: &QuadratureSpec,
    search: &BallSearchSpec,
) -> Result<f64> {
    ensure_positive("eps", eps)?;
    variant.check_p(p)?;
    let nodes = quad.ball_nodes()?;
    match variant {
        DppVariant::Dpp1 => {
            let a3 = ball_mean(u, eps, q, &nodes)?;
            let ex = extremize(|w| u.eval(group_mul(q, w.dilate(eps))), search)?;
            Ok(alpha_p(p) * a3 + 0.5 * beta_p(p) * (ex.min.value + ex.max.value))
        }
        DppVariant::Dpp2 => {
            let g = gamma_p(p)?;
            let a3 = ball_mean(u, eps, q, &nodes)?;
            let ex = extremize(|w| ball_mean(u, eps, group_mul(q, w.dilate(g * eps)), &nodes), search)?;
            Ok((a3 + ex.min.value + ex.max.value) / 3.0)
        }
        DppVariant::Dpp3(par) => {
            let ex = extremize(
                |w| {
                    let c = group_mul(q, w.dilate(eps));
                    match par.shape_at(q, c, eps)? {
                        Some(shape) => ellipsoid_mean(u, &shape, c, &nodes),
                        None => ball_mean(u, par.s * eps, c, &nodes),
                    }
                },
                search,
            )?;
            Ok(0.5 * (ex.min.value + ex.max.value))
        }
    }
}
