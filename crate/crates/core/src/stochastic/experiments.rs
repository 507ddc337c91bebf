use std::f64::consts::PI;

use rand::Rng;

use crate::averaging::DppVariant;
use crate::calculus::{radial_p_harmonic, radial_profile, FnField};
use crate::domains::{check_boundary_point, make_annulus_domain, Domain};
use crate::dpp::{solve_dpp, DppConfig, DppSolution};
use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::{dist, sample_ball, sphere_point, Point};

use super::{greedy_strategy, run_game, run_indexed, run_walk, Estimate, GameConfig, Mode, Strategy, WalkConfig};

/// `(v(R2) - v(R1)) / (v(R3) - v(R1))` with `v` the radial profile.
pub fn annulus_bound(r1: f64, r2: f64, r3: f64, p: f64) -> Result<f64> {
    check_radii(r1, r2, r3)?;
    let v1 = radial_profile(p, r1)?;
    Ok((radial_profile(p, r2)? - v1) / (radial_profile(p, r3)? - v1))
}

fn check_radii(r1: f64, r2: f64, r3: f64) -> Result<()> {
    ensure_positive("R1", r1)?;
    if !(r1 < r2 && r2 < r3 && r3.is_finite()) {
        return Err(Error::invalid(format!("radii must satisfy R1 < R2 < R3, got ({r1}, {r2}, {r3})")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusParams {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub p: f64,
    pub eps: f64,
    pub n_traj: usize,
    pub xi: f64,
    pub seed: u64,
    /// Solver stopping tolerance.
    pub tol: f64,
    pub h_rho: Option<f64>,
    pub n_phi: Option<usize>,
    pub max_steps: usize,
}

impl AnnulusParams {
    pub fn new(r1: f64, r2: f64, r3: f64, p: f64, eps: f64, n_traj: usize, xi: f64) -> Self {
        AnnulusParams {
            r1,
            r2,
            r3,
            p,
            eps,
            n_traj,
            xi,
            seed: 0,
            tol: 1e-7,
            h_rho: None,
            n_phi: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnnulusReport {
    /// Fraction of games ending outside the closed ball `B_{R3-ε}(0)`.
    pub exit_prob: Estimate,
    pub bound: f64,
    pub xi: f64,
    pub solver_iterations: usize,
    pub solver_residual: f64,
}

/// Tug-of-war on the annulus `R1 < |q| < R3` with data `v(|q|)`: player II
/// plays greedy-minimize and player I greedy-maximize on the solved DPP
/// field. Game `i` starts at `S(β, θ)` dilated to radius `R2`, with
/// `sin β` and `θ` uniform, drawn from the game's own stream.
pub fn annulus_experiment(params: &AnnulusParams) -> Result<AnnulusReport> {
    let AnnulusParams { r1, r2, r3, p, eps, .. } = *params;
    let bound = annulus_bound(r1, r2, r3, p)?;
    let dom = make_annulus_domain(Point::default(), r1, r3)?;
    let data = radial_p_harmonic(p)?;
    let mut cfg = DppConfig::new(eps, p, DppVariant::Dpp2)?;
    cfg.tol = params.tol;
    let grid = cfg.axisymmetric_grid(&dom, params.h_rho, params.n_phi)?;
    let sol = solve_dpp(&dom, &data, &cfg, &grid)?;
    let game = GameConfig {
        max_steps: params.max_steps,
        base_seed: params.seed,
        ..GameConfig::new(eps, p, DppVariant::Dpp2)?
    };
    let s_i = greedy_strategy(&sol, &game, Mode::Maximize)?;
    let s_ii = greedy_strategy(&sol, &game, Mode::Minimize)?;
    let runs = run_indexed(params.n_traj, params.seed, |_, rng| {
        let beta = rng.random_range(-1.0f64..1.0).asin();
        let theta = rng.random_range(0.0..2.0 * PI);
        let q0 = sphere_point(beta, theta).dilate(r2);
        let o = run_game(&dom, &game, q0, &s_i, &s_ii, rng)?;
        Ok((if o.terminal.gauge() > r3 - eps { 1.0 } else { 0.0 }, o.truncated))
    })?;
    let hits: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Ok(AnnulusReport {
        exit_prob: Estimate::from_samples(&hits, runs.iter().filter(|r| r.1).count())?,
        bound,
        xi: params.xi,
        solver_iterations: sol.iterations,
        solver_residual: sol.residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailFit {
    pub n0: usize,
    /// `ℙ(τ > k·n0)` for `k = 0, 1, ...`.
    pub survival: Vec<f64>,
    /// Least-squares slope of `ln ℙ(τ > k·n0)` against `k` over the
    /// positive entries.
    pub slope: f64,
}

/// Empirical tail of the stopping time of `n_traj` games from `q0`.
#[allow(clippy::too_many_arguments)]
pub fn stopping_time_tail<D: Domain + ?Sized>(
    dom: &D,
    cfg: &GameConfig,
    q0: Point,
    s_i: &dyn Strategy,
    s_ii: &dyn Strategy,
    n_traj: usize,
    n0: usize,
    k_max: usize,
) -> Result<TailFit> {
    if n0 == 0 || k_max == 0 {
        return Err(Error::invalid("tail fit needs n0 ≥ 1 and k_max ≥ 1"));
    }
    let taus = run_indexed(n_traj, cfg.base_seed, |_, rng| Ok(run_game(dom, cfg, q0, s_i, s_ii, rng)?.tau))?;
    let survival: Vec<f64> =
        (0..=k_max).map(|k| taus.iter().filter(|&&t| t > k * n0).count() as f64 / n_traj.max(1) as f64).collect();
    let pts: Vec<(f64, f64)> =
        survival.iter().enumerate().filter(|(_, &s)| s > 0.0).map(|(k, &s)| (k as f64, s.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::invalid("fewer than two positive tail probabilities; lower n0"));
    }
    let m = pts.len() as f64;
    let (mk, ml) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let cov: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1 - ml)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
    Ok(TailFit { n0, survival, slope: cov / var })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbeKind {
    Walk,
    /// Game with player II greedy-minimizing and player I greedy-maximizing
    /// the DPP solution for the data `-min(1, d(q, q0))`.
    Game {
        p: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityParams {
    pub eta: f64,
    pub delta: f64,
    pub eps: f64,
    pub n_traj: usize,
    pub kind: ProbeKind,
    /// Starting points are uniform in `B_{δ̂}(q0) ∩ D` with
    /// `δ̂ = start_ratio · δ`.
    pub start_ratio: f64,
    pub seed: u64,
    pub stop_fraction: f64,
    pub max_steps: usize,
    pub tol: f64,
    pub h_xy: Option<f64>,
    pub h_z: Option<f64>,
}

impl RegularityParams {
    pub fn new(eta: f64, delta: f64, eps: f64, n_traj: usize, kind: ProbeKind) -> Self {
        RegularityParams {
            eta,
            delta,
            eps,
            n_traj,
            kind,
            start_ratio: 0.125,
            seed: 0,
            stop_fraction: 1e-3,
            max_steps: 1_000_000,
            tol: 1e-7,
            h_xy: None,
            h_z: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    /// Fraction of trajectories ending in `B_δ(q0)`.
    pub hit: Estimate,
    pub delta_hat: f64,
    /// `hit.mean ≥ 1 - η`.
    pub regular: bool,
}

const START_TRIES: usize = 1_000_000;

/// Empirical probability that a walk or game started near the boundary
/// point `q0` ends within `δ` of it.
pub fn regularity_probe<D: Domain + ?Sized>(dom: &D, q0: Point, params: &RegularityParams) -> Result<RegularityReport> {
    ensure_positive("delta", params.delta)?;
    ensure_positive("start_ratio", params.start_ratio)?;
    if !(params.eta > 0.0 && params.eta < 1.0) {
        return Err(Error::invalid(format!("eta must lie in (0, 1), got {}", params.eta)));
    }
    check_boundary_point(dom, q0, params.seed)?;
    let delta_hat = params.start_ratio * params.delta;
    let start = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<Point> {
        for _ in 0..START_TRIES {
            let q = sample_ball(q0, delta_hat, rng);
            if dom.contains(q) {
                return Ok(q);
            }
        }
        Err(Error::invalid("no starting point found in the domain near q0"))
    };
    let terminals: Vec<(Point, bool)> = match params.kind {
        ProbeKind::Walk => {
            let cfg = WalkConfig {
                eps: params.eps,
                stop_fraction: params.stop_fraction,
                max_steps: params.max_steps,
                base_seed: params.seed,
            };
            run_indexed(params.n_traj, params.seed, |_, rng| {
                let o = run_walk(dom, &cfg, start(rng)?, rng)?;
                Ok((o.terminal, o.truncated))
            })?
        }
        ProbeKind::Game { p } => {
            let sol = solve_regularity_field(dom, q0, p, params)?;
            let game = GameConfig {
                max_steps: params.max_steps,
                base_seed: params.seed,
                ..GameConfig::new(params.eps, p, DppVariant::Dpp2)?
            };
            let s_i = greedy_strategy(&sol, &game, Mode::Maximize)?;
            let s_ii = greedy_strategy(&sol, &game, Mode::Minimize)?;
            run_indexed(params.n_traj, params.seed, |_, rng| {
                let o = run_game(dom, &game, start(rng)?, &s_i, &s_ii, rng)?;
                Ok((o.terminal, o.truncated))
            })?
        }
    };
    let hits: Vec<f64> = terminals.iter().map(|(t, _)| if dist(q0, *t) < params.delta { 1.0 } else { 0.0 }).collect();
    let hit = Estimate::from_samples(&hits, terminals.iter().filter(|t| t.1).count())?;
    Ok(RegularityReport { regular: hit.mean >= 1.0 - params.eta, hit, delta_hat })
}

fn solve_regularity_field<D: Domain + ?Sized>(
    dom: &D,
    q0: Point,
    p: f64,
    params: &RegularityParams,
) -> Result<DppSolution> {
    let data = FnField::new(move |q: Point| -dist(q0, q).min(1.0));
    let mut cfg = DppConfig::new(params.eps, p, DppVariant::Dpp2)?;
    cfg.tol = params.tol;
    let grid = cfg.box_grid(dom, params.h_xy, params.h_z)?;
    solve_dpp(dom, &data, &cfg, &grid)
}
