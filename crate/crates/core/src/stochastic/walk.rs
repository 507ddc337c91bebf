use rand::Rng;

use crate::calculus::ScalarField;
use crate::domains::Domain;
use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::{sample_unit_disc, Point};

use super::trace::TraceRow;
use super::{run_indexed, Estimate};

/// Relative margin taken off the distance to the complement, so that
/// rounding in the distance can never push a step across the boundary.
const STEP_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkConfig {
    pub eps: f64,
    /// The walk halts once its step radius `ε ∧ dist` falls below
    /// `stop_fraction · ε`.
    pub stop_fraction: f64,
    pub max_steps: usize,
    pub base_seed: u64,
}

impl WalkConfig {
    pub fn new(eps: f64) -> Result<Self> {
        let cfg = WalkConfig { eps, stop_fraction: 1e-3, max_steps: 1_000_000, base_seed: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("eps", self.eps)?;
        if !(self.stop_fraction > 0.0 && self.stop_fraction < 1.0) {
            return Err(Error::invalid(format!("stop_fraction must lie in (0, 1), got {}", self.stop_fraction)));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkOutcome {
    pub terminal: Point,
    pub steps: usize,
    pub truncated: bool,
}

/// `q * ρ_r(a, b, 0) = q + r(a, b, ½(x b - y a))`.
#[inline]
pub fn walk_step(q: Point, r: f64, a: f64, b: f64) -> Point {
    Point::new(q.x + r * a, q.y + r * b, q.z + 0.5 * r * (q.x * b - q.y * a))
}

pub fn run_walk<D, R>(dom: &D, cfg: &WalkConfig, q0: Point, rng: &mut R) -> Result<WalkOutcome>
where
    D: Domain + ?Sized,
    R: Rng + ?Sized,
{
    run_walk_traced(dom, cfg, q0, rng, &mut |_| {})
}

/// [`run_walk`] reporting every visited point (starting with `q0` at
/// step 0) to `trace`.
pub fn run_walk_traced<D, R>(
    dom: &D,
    cfg: &WalkConfig,
    q0: Point,
    rng: &mut R,
    trace: &mut dyn FnMut(TraceRow),
) -> Result<WalkOutcome>
where
    D: Domain + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    if !dom.contains(q0) {
        return Err(Error::OutsideDomain);
    }
    let mut q = q0;
    trace(TraceRow { traj: 0, step: 0, point: q, s: None, t: None });
    for step in 0..cfg.max_steps {
        let r = cfg.eps.min(dom.dist_capped(q, cfg.eps) * (1.0 - STEP_MARGIN));
        if r < cfg.stop_fraction * cfg.eps {
            return Ok(WalkOutcome { terminal: q, steps: step, truncated: false });
        }
        let (a, b) = sample_unit_disc(rng);
        q = walk_step(q, r, a, b);
        if !dom.contains(q) {
            return Err(Error::ConfinementViolated { step: step + 1 });
        }
        trace(TraceRow { traj: 0, step: step + 1, point: q, s: None, t: None });
    }
    Ok(WalkOutcome { terminal: q, steps: cfg.max_steps, truncated: true })
}

/// Mean of `f` at the terminal points of `n_traj` walks from `q0`.
pub fn estimate_walk_value<D, F>(dom: &D, cfg: &WalkConfig, f: &F, q0: Point, n_traj: usize) -> Result<Estimate>
where
    D: Domain + ?Sized,
    F: ScalarField + ?Sized,
{
    let runs = run_indexed(n_traj, cfg.base_seed, |_, rng| {
        let o = run_walk(dom, cfg, q0, rng)?;
        Ok((f.eval(o.terminal)?, o.truncated))
    })?;
    let values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Estimate::from_samples(&values, runs.iter().filter(|r| r.1).count())
}
