//! Monotone fixed-point solver for the discrete dynamic programming
//! principle `u = d_ε S u + (1 - d_ε) F`.

mod grid;
mod io;
mod operator;

pub use grid::{AxiGrid, BoxGrid, Grid, GridField, GridSpec, Stencil, DEFAULT_PHI_NODES, MAX_NODES};
pub use io::{read_binary, write_binary, write_csv};
pub use operator::DiscreteOperator;

use crate::averaging::{gamma_p, BallSearchSpec, DppVariant, QuadratureSpec};
use crate::calculus::ScalarField;
use crate::domains::Domain;
use crate::error::{ensure_positive, Error, Result};
use crate::hgroup::Point;

/// Default number of candidate shifts in the solver.
pub const SOLVER_CANDIDATES: usize = 128;
/// Default number of quadrature offsets in the solver.
pub const SOLVER_OFFSETS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DppConfig {
    pub eps: f64,
    pub p: f64,
    pub variant: DppVariant,
    pub tol: f64,
    pub max_iter: usize,
    pub quad: QuadratureSpec,
    /// Only `candidate_count` and `seed` are used: the solver evaluates
    /// the fixed net without refinement.
    pub search: BallSearchSpec,
}

impl DppConfig {
    pub fn new(eps: f64, p: f64, variant: DppVariant) -> Result<Self> {
        let cfg = DppConfig {
            eps,
            p,
            variant,
            tol: 1e-9,
            max_iter: 200_000,
            quad: QuadratureSpec::tensor_with_ball_nodes(SOLVER_OFFSETS),
            search: BallSearchSpec { candidate_count: SOLVER_CANDIDATES, refine_rounds: 0, seed: 0 },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |e: Error| Error::ConfigInvalid(e.to_string());
        ensure_positive("eps", self.eps).map_err(bad)?;
        ensure_positive("tol", self.tol).map_err(bad)?;
        if self.max_iter == 0 {
            return Err(Error::ConfigInvalid("max_iter must be at least 1".into()));
        }
        match self.variant {
            DppVariant::Dpp1 => {
                return Err(Error::ConfigInvalid("the solver supports the dpp2 and dpp3 variants".into()))
            }
            v => v.check_p(self.p).map_err(bad)?,
        }
        self.quad.validate().map_err(bad)?;
        self.search.validate().map_err(bad)
    }

    /// Gauge radius of everything one step of the scheme can read.
    pub fn reach(&self) -> Result<f64> {
        Ok(match self.variant {
            DppVariant::Dpp3(par) => self.eps * (1.0 + par.s * par.a.max(1.0)),
            _ => self.eps * (1.0 + gamma_p(self.p)?),
        })
    }

    /// Box grid for `dom` with the collar of [`GridSpec::box_for`].
    pub fn box_grid<D: Domain + ?Sized>(&self, dom: &D, h_xy: Option<f64>, h_z: Option<f64>) -> Result<GridSpec> {
        GridSpec::box_for(dom, self.eps, self.reach()?, h_xy, h_z)
    }

    pub fn axisymmetric_grid<D: Domain + ?Sized>(
        &self,
        dom: &D,
        h_rho: Option<f64>,
        n_phi: Option<usize>,
    ) -> Result<GridSpec> {
        GridSpec::axisymmetric_for(dom, self.eps, self.reach()?, h_rho, n_phi)
    }
}

/// `d_ε(q) = min(ε, dist(q, ℍ \ D)) / ε`.
pub fn d_eps<D: Domain + ?Sized>(dom: &D, eps: f64, q: Point) -> f64 {
    if eps.is_nan() || eps <= 0.0 {
        return 0.0;
    }
    dom.dist_capped(q, eps) / eps
}

/// Output of [`solve_dpp`].
#[derive(Clone, Debug)]
pub struct DppSolution {
    pub u: GridField,
    /// `𝒜₃(u, ε)` wherever its stencil fits in the grid (NaN elsewhere);
    /// present for the dpp2 variant.
    pub averaged: Option<GridField>,
    pub iterations: usize,
    pub residual: f64,
    pub cfg: DppConfig,
}

/// Tolerance of the per-sweep monotonicity check, relative to the data scale.
const MONOTONE_SLACK: f64 = 64.0 * f64::EPSILON;

/// Jacobi iteration `u_{n+1} = T u_n` from `u_0 ≡ min F`, stopping when
/// `sup |u_{n+1} - u_n| ≤ tol`. Every sweep checks that the iterates do not
/// decrease.
pub fn solve_dpp<D, F>(dom: &D, data: &F, cfg: &DppConfig, grid: &GridSpec) -> Result<DppSolution>
where
    D: Domain + ?Sized,
    F: ScalarField + ?Sized,
{
    let op = DiscreteOperator::new(dom, data, cfg, grid.build()?)?;
    solve_with(&op, cfg)
}

/// [`solve_dpp`] on a prebuilt operator.
pub fn solve_with(op: &DiscreteOperator, cfg: &DppConfig) -> Result<DppSolution> {
    let f = op.data();
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let slack = MONOTONE_SLACK * scale;
    let mut u = vec![lo; f.len()];
    let mut residual = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < cfg.max_iter {
        let next = op.apply(&u);
        sweeps += 1;
        residual = 0.0;
        for (node, (&a, &b)) in u.iter().zip(&next).enumerate() {
            if b < a - slack {
                return Err(Error::MonotonicityViolated { sweep: sweeps, node, drop: a - b });
            }
            residual = residual.max((b - a).abs());
        }
        u = next;
        if residual <= cfg.tol {
            break;
        }
    }
    if residual > cfg.tol {
        return Err(Error::NonConvergence { iterations: sweeps, residual });
    }
    let averaged = match cfg.variant {
        DppVariant::Dpp2 => Some(GridField::new(op.grid().clone(), op.a_field(&u))?),
        _ => None,
    };
    Ok(DppSolution { u: GridField::new(op.grid().clone(), u)?, averaged, iterations: sweeps, residual, cfg: *cfg })
}

/// `sup |u - T u|` over the interior nodes of `u`'s grid.
pub fn dpp_residual<D, F>(u: &GridField, dom: &D, data: &F, cfg: &DppConfig) -> Result<f64>
where
    D: Domain + ?Sized,
    F: ScalarField + ?Sized,
{
    let op = DiscreteOperator::new(dom, data, cfg, u.grid.clone())?;
    Ok(op.residual(&u.values))
}

/// `sup |u - F|` over the grid nodes lying in `dom`.
pub fn sup_error_in_domain<D, F>(u: &GridField, dom: &D, reference: &F) -> Result<f64>
where
    D: Domain + ?Sized,
    F: ScalarField + ?Sized,
{
    let mut e: f64 = 0.0;
    for (q, v) in u.node_points() {
        if dom.contains(q) {
            e = e.max((v - reference.eval(q)?).abs());
        }
    }
    Ok(e)
}
