//! Mean value operators on Korányi balls, circles, discs and ellipsoids,
//! the `½(inf + sup)` average, the composite operators of the dynamic
//! programming principle, and fitting of their `r²` coefficients.

mod dpp_ops;
mod quadrature;
mod search;

use std::f64::consts::PI;

pub use dpp_ops::{alpha_p, beta_p, dpp_operator, gamma_p, Dpp3Params, DppVariant, CONSTRAINT_TOL, DEGENERATE_HOR};
pub use quadrature::{ball_mean, ellipsoid_avg, ellipsoid_mean, psi, stochastic_avg, AvgKind, QuadratureSpec};
pub use search::{
    candidate_net, deterministic_avg, extremize, BallSearchSpec, Extrema, Extremum, MinMaxAverage, NetPoint,
};

use crate::calculus::{delta_inf, HorizontalJet, ScalarField};
use crate::error::{Error, Result};
use crate::hgroup::{EllipsoidShape, Point};

/// Slope of the through-origin regression of `probe(r) - f(q)` on `r²`.
pub fn coefficient_fit<P, F>(probe: P, f: &F, q: Point, radii: &[f64]) -> Result<f64>
where
    P: Fn(f64) -> Result<f64>,
    F: ScalarField + ?Sized,
{
    if radii.len() < 2 {
        return Err(Error::invalid("coefficient fit needs at least two radii"));
    }
    let f0 = f.eval(q)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for &r in radii {
        crate::error::ensure_positive("fit radius", r)?;
        let r2 = r * r;
        num += (probe(r)? - f0) * r2;
        den += r2 * r2;
    }
    Ok(num / den)
}

/// Any of the averaging operators with its fixed parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Operator {
    Stochastic(AvgKind),
    Ellipsoid { aspect: f64, orientation: Point },
    MinMax,
    Dpp { variant: DppVariant, p: f64 },
}

impl Operator {
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Stochastic(AvgKind::A1) => "A1",
            Operator::Stochastic(AvgKind::A2) => "A2",
            Operator::Stochastic(AvgKind::A3) => "A3",
            Operator::Stochastic(AvgKind::A3K) => "A3K",
            Operator::Ellipsoid { .. } => "ellipsoid",
            Operator::MinMax => "minmax",
            Operator::Dpp { variant: DppVariant::Dpp1, .. } => "dpp1",
            Operator::Dpp { variant: DppVariant::Dpp2, .. } => "dpp2",
            Operator::Dpp { variant: DppVariant::Dpp3(_), .. } => "dpp3",
        }
    }

    pub fn apply<F: ScalarField + ?Sized>(
        &self,
        f: &F,
        r: f64,
        q: Point,
        quad: &QuadratureSpec,
        search: &BallSearchSpec,
    ) -> Result<f64> {
        match *self {
            Operator::Stochastic(kind) => stochastic_avg(kind, f, r, q, quad),
            Operator::Ellipsoid { aspect, orientation } => {
                ellipsoid_avg(f, &EllipsoidShape::new(r, aspect, orientation)?, q, quad)
            }
            Operator::MinMax => deterministic_avg(f, r, q, search).map(|m| m.value),
            Operator::Dpp { variant, p } => dpp_operator(&variant, f, r, q, p, quad, search),
        }
    }

    /// The `r²` coefficient the expansion predicts from the jet at `q`.
    pub fn expected_coefficient(&self, jet: &HorizontalJet) -> Result<f64> {
        let dh = jet.delta_h();
        Ok(match *self {
            Operator::Stochastic(AvgKind::A1) => dh / 4.0,
            Operator::Stochastic(AvgKind::A2) => dh / 8.0,
            Operator::Stochastic(AvgKind::A3) => dh / (3.0 * PI),
            Operator::Stochastic(AvgKind::A3K) => PI * dh / 24.0,
            Operator::Ellipsoid { aspect, orientation } => {
                let n = orientation.euclid_norm();
                let nu = [orientation.x / n, orientation.y / n];
                (dh + (aspect * aspect - 1.0) * jet.hess_quadratic(nu)) / (3.0 * PI)
            }
            Operator::MinMax => 0.5 * delta_inf(jet)?,
            Operator::Dpp { variant, p } => {
                let dn = dh + (p - 2.0) * delta_inf(jet)?;
                match variant {
                    DppVariant::Dpp1 => dn / (2.0 * (p - 2.0) + 3.0 * PI),
                    DppVariant::Dpp2 => dn / (3.0 * PI),
                    DppVariant::Dpp3(_) => dn / (p - 1.0),
                }
            }
        })
    }
}
