use rand::Rng;

use crate::averaging::{gamma_p, Dpp3Params, DppVariant, DEGENERATE_HOR};
use crate::calculus::ScalarField;
use crate::domains::Domain;
use crate::dpp::d_eps;
use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::{group_mul, sample_unit_ball, EllipsoidShape, Point};

use super::trace::TraceRow;
use super::{run_indexed, Estimate, Strategy};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameConfig {
    pub eps: f64,
    pub p: f64,
    pub max_steps: usize,
    pub base_seed: u64,
    /// `Dpp2` or `Dpp3`.
    pub variant: DppVariant,
}

impl GameConfig {
    pub fn new(eps: f64, p: f64, variant: DppVariant) -> Result<Self> {
        let cfg = GameConfig { eps, p, max_steps: 1_000_000, base_seed: 0, variant };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |e: Error| Error::ConfigInvalid(e.to_string());
        ensure_positive("eps", self.eps).map_err(bad)?;
        if self.max_steps == 0 {
            return Err(Error::ConfigInvalid("max_steps must be at least 1".into()));
        }
        gamma_p(self.p).map_err(bad)?;
        match self.variant {
            DppVariant::Dpp1 => Err(Error::ConfigInvalid("the dpp1 game is not supported".into())),
            v => v.check_p(self.p).map_err(bad),
        }
    }

    /// `γ_p = √((p-2)/π)`.
    pub fn gamma(&self) -> Result<f64> {
        gamma_p(self.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameOutcome {
    /// `Q_{τ-1}`, or the position at truncation.
    pub terminal: Point,
    pub tau: usize,
    pub truncated: bool,
}

pub fn run_game<D, R>(
    dom: &D,
    cfg: &GameConfig,
    q0: Point,
    s_i: &dyn Strategy,
    s_ii: &dyn Strategy,
    rng: &mut R,
) -> Result<GameOutcome>
where
    D: Domain + ?Sized,
    R: Rng + ?Sized,
{
    run_game_traced(dom, cfg, q0, s_i, s_ii, rng, &mut |_| {})
}

/// [`run_game`] reporting each position with the coin `s_n` and threshold
/// `t_n` drawn to leave it.
///
/// Every step draws `s_n`, then `t_n` uniform in `(0, 1]`, then `w_n`
/// uniform in `B₁(0)`; the game stops at step `n` when `t_n > d_ε(q_{n-1})`.
/// For dpp2, `s_n ∈ {1, 2, 3}` picks player I, player II or no shift, and
/// `q_n = q_{n-1} * ρ_{γε}(σ) * ρ_ε(w_n)`. For dpp3, `s_n ∈ {1, 2}` picks the
/// player, who moves to `y = q_{n-1} * ρ_ε(σ)`, and `q_n` is `y` followed
/// by `w_n` mapped into the ellipsoid of radius `s_p ε`, aspect
/// `1 + (a_p - 1)|σ_h|²` and direction `σ_h`.
pub fn run_game_traced<D, R>(
    dom: &D,
    cfg: &GameConfig,
    q0: Point,
    s_i: &dyn Strategy,
    s_ii: &dyn Strategy,
    rng: &mut R,
    trace: &mut dyn FnMut(TraceRow),
) -> Result<GameOutcome>
where
    D: Domain + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let gamma = cfg.gamma()?;
    let eps = cfg.eps;
    let (coins, dpp3) = match cfg.variant {
        DppVariant::Dpp3(par) => (2u8, Some(par)),
        _ => (3u8, None),
    };
    let mut q = q0;
    for n in 1..=cfg.max_steps {
        let s: u8 = rng.random_range(1..=coins);
        let t: f64 = 1.0 - rng.random::<f64>();
        let w = sample_unit_ball(rng);
        let stop = t > d_eps(dom, eps, q);
        trace(TraceRow { traj: 0, step: n - 1, point: q, s: Some(s), t: Some(t) });
        if stop {
            return Ok(GameOutcome { terminal: q, tau: n, truncated: false });
        }
        let sigma = match s {
            1 => s_i.advance(q, n - 1)?,
            2 => s_ii.advance(q, n - 1)?,
            _ => Point::default(),
        }
        .clamp_to_unit_ball();
        q = match dpp3 {
            None => group_mul(group_mul(q, sigma.dilate(gamma * eps)), w.dilate(eps)),
            Some(par) => dpp3_move(q, sigma, w, eps, &par)?,
        };
    }
    trace(TraceRow { traj: 0, step: cfg.max_steps, point: q, s: None, t: None });
    Ok(GameOutcome { terminal: q, tau: cfg.max_steps, truncated: true })
}

fn dpp3_move(q: Point, sigma: Point, w: Point, eps: f64, par: &Dpp3Params) -> Result<Point> {
    let y = group_mul(q, sigma.dilate(eps));
    let h = sigma.hor_norm();
    if h < DEGENERATE_HOR {
        return Ok(group_mul(y, w.dilate(par.s * eps)));
    }
    let aspect = 1.0 + (par.a - 1.0) * h * h;
    let shape = EllipsoidShape::new(par.s * eps, aspect, Point::new(sigma.x / h, sigma.y / h, 0.0))?;
    Ok(shape.place(y, w))
}

/// Mean of `f(Q_{τ-1})` over `n_traj` games from `q0`; truncated games
/// contribute `f` at the truncation point.
pub fn estimate_game_value<D, F>(
    dom: &D,
    cfg: &GameConfig,
    f: &F,
    q0: Point,
    s_i: &dyn Strategy,
    s_ii: &dyn Strategy,
    n_traj: usize,
) -> Result<Estimate>
where
    D: Domain + ?Sized,
    F: ScalarField + ?Sized,
{
    let runs = run_indexed(n_traj, cfg.base_seed, |_, rng| {
        let o = run_game(dom, cfg, q0, s_i, s_ii, rng)?;
        Ok((f.eval(o.terminal)?, o.truncated))
    })?;
    let values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Estimate::from_samples(&values, runs.iter().filter(|r| r.1).count())
}
