use crate::averaging::{ball_mean, candidate_net, ellipsoid_mean, Dpp3Params, DppVariant};
use crate::dpp::{DppSolution, GridField};
use crate::error::{Error, Result};
use crate::hgroup::{group_mul, Point};

use super::GameConfig;

/// Size of the candidate net of [`GreedyStrategy`].
pub const GREEDY_CANDIDATES: usize = 128;

/// A Markov strategy: the shift vector chosen at the current position.
pub trait Strategy: Send + Sync {
    /// Shift for the move played from `q` at step `step` (0-based). The
    /// result lies in the closed unit ball.
    fn advance(&self, q: Point, step: usize) -> Result<Point>;
}

impl<S: Strategy + ?Sized> Strategy for &S {
    fn advance(&self, q: Point, step: usize) -> Result<Point> {
        (**self).advance(q, step)
    }
}

/// Never shifts.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroStrategy;

impl Strategy for ZeroStrategy {
    fn advance(&self, _q: Point, _step: usize) -> Result<Point> {
        Ok(Point::default())
    }
}

/// A closure strategy; its output is clamped to the closed unit ball.
pub struct FnStrategy<F>(pub F);

impl<F> Strategy for FnStrategy<F>
where
    F: Fn(Point, usize) -> Point + Send + Sync,
{
    fn advance(&self, q: Point, step: usize) -> Result<Point> {
        Ok((self.0)(q, step).clamp_to_unit_ball())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug)]
enum Objective {
    /// Interpolated `𝒜₃(u, ε)` at `q * ρ_{γε}(σ)`.
    Averaged { field: GridField, radius: f64 },
    /// Ellipsoid average of `u` centered at `q * ρ_ε(σ)`.
    Ellipsoid { u: GridField, params: Dpp3Params, eps: f64, nodes: Vec<Point> },
}

/// Picks the best point of a fixed net of [`GREEDY_CANDIDATES`] shifts,
/// the lowest index winning ties.
#[derive(Clone, Debug)]
pub struct GreedyStrategy {
    objective: Objective,
    net: Vec<Point>,
    mode: Mode,
}

impl GreedyStrategy {
    /// Greedy selection on a precomputed field of `𝒜₃(u, ε)` values for
    /// the dpp2 game of `cfg`.
    pub fn from_averaged(field: GridField, cfg: &GameConfig, mode: Mode, net_seed: u64) -> Result<Self> {
        cfg.validate()?;
        if cfg.variant != DppVariant::Dpp2 {
            return Err(Error::ConfigInvalid("an averaged field drives only the dpp2 game".into()));
        }
        Ok(GreedyStrategy {
            objective: Objective::Averaged { field, radius: cfg.gamma()? * cfg.eps },
            net: net_points(net_seed),
            mode,
        })
    }

    pub fn net(&self) -> &[Point] {
        &self.net
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn objective(&self, q: Point, sigma: Point) -> Result<f64> {
        match &self.objective {
            Objective::Averaged { field, radius } => field.interpolate(group_mul(q, sigma.dilate(*radius))),
            Objective::Ellipsoid { u, params, eps, nodes } => {
                let c = group_mul(q, sigma.dilate(*eps));
                match params.shape_at(q, c, *eps)? {
                    Some(shape) => ellipsoid_mean(u, &shape, c, nodes),
                    None => ball_mean(u, params.s * eps, c, nodes),
                }
            }
        }
    }

    /// Index of the selected net point at `q`.
    pub fn select(&self, q: Point) -> Result<usize> {
        let mut best = 0;
        let mut best_v = self.objective(q, self.net[0])?;
        for (k, &s) in self.net.iter().enumerate().skip(1) {
            let v = self.objective(q, s)?;
            let better = match self.mode {
                Mode::Maximize => v > best_v,
                Mode::Minimize => v < best_v,
            };
            if better {
                best = k;
                best_v = v;
            }
        }
        Ok(best)
    }
}

impl Strategy for GreedyStrategy {
    fn advance(&self, q: Point, _step: usize) -> Result<Point> {
        Ok(self.net[self.select(q)?])
    }
}

fn net_points(seed: u64) -> Vec<Point> {
    candidate_net(GREEDY_CANDIDATES, seed).iter().map(|n| n.point().clamp_to_unit_ball()).collect()
}

/// Greedy strategy from a solved DPP field: dpp2 uses the solver's
/// `𝒜₃(u, ε)` field, dpp3 evaluates ellipsoid averages of `u` with the
/// solver's quadrature offsets.
pub fn greedy_strategy(sol: &DppSolution, cfg: &GameConfig, mode: Mode) -> Result<GreedyStrategy> {
    cfg.validate()?;
    if sol.cfg.eps != cfg.eps || sol.cfg.p != cfg.p || sol.cfg.variant != cfg.variant {
        return Err(Error::ConfigInvalid("game and solver use different (eps, p, variant)".into()));
    }
    let seed = sol.cfg.search.seed;
    match cfg.variant {
        DppVariant::Dpp2 => {
            let field = sol
                .averaged
                .clone()
                .ok_or_else(|| Error::ConfigInvalid("solution carries no averaged field".into()))?;
            GreedyStrategy::from_averaged(field, cfg, mode, seed)
        }
        DppVariant::Dpp3(params) => Ok(GreedyStrategy {
            objective: Objective::Ellipsoid {
                u: sol.u.clone(),
                params,
                eps: cfg.eps,
                nodes: sol.cfg.quad.ball_nodes()?,
            },
            net: net_points(seed),
            mode,
        }),
        DppVariant::Dpp1 => Err(Error::ConfigInvalid("the dpp1 game is not supported".into())),
    }
}
