//! JSON experiment configs. Every struct rejects unknown keys.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use heisenberg_core::averaging::{AvgKind, Dpp3Params, DppVariant, Operator};
use heisenberg_core::calculus::{radial_p_harmonic_at, GaugePower, Polynomial, ScalarField};
use heisenberg_core::domains::{make_annulus_domain, make_ball_domain, make_cusp_domain, Domain};
use heisenberg_core::hgroup::Point;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Keys shared by every experiment; command-line flags take precedence.
pub trait Common {
    fn seed(&self) -> Option<u64>;
    fn threads(&self) -> Option<usize>;
    fn out(&self) -> Option<&Path>;
}

macro_rules! common {
    ($($t:ty),*) => {$(
        impl Common for $t {
            fn seed(&self) -> Option<u64> {
                self.seed
            }
            fn threads(&self) -> Option<usize> {
                self.threads
            }
            fn out(&self) -> Option<&Path> {
                self.out.as_deref()
            }
        }
    )*};
}

common!(ExpandConfig, DppSolveConfig, WalkConfigSpec, GameConfigSpec, AnnulusConfig, RegularityConfig);

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
    },
    Annulus {
        #[serde(default)]
        center: [f64; 3],
        inner: f64,
        outer: f64,
    },
    Cusp {
        alpha: f64,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<Box<dyn Domain>, CliError> {
        Ok(match *self {
            DomainSpec::Ball { center, radius } => Box::new(make_ball_domain(center.into(), radius).map_err(config)?),
            DomainSpec::Annulus { center, inner, outer } => {
                Box::new(make_annulus_domain(center.into(), inner, outer).map_err(config)?)
            }
            DomainSpec::Cusp { alpha } => Box::new(make_cusp_domain(alpha).map_err(config)?),
        })
    }
}

/// Named built-in fields.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    X {},
    Y {},
    Z {},
    Constant {
        value: f64,
    },
    /// Terms `[coefficient, [i, j, k]]` for `c·xⁱyʲzᵏ`.
    Polynomial {
        terms: Vec<(f64, [u32; 3])>,
    },
    GaugePower {
        s: f64,
        #[serde(default)]
        center: [f64; 3],
    },
    Radial {
        p: f64,
        #[serde(default)]
        center: [f64; 3],
    },
}

impl FieldSpec {
    pub fn build(&self) -> Result<Arc<dyn ScalarField>, CliError> {
        Ok(match self {
            FieldSpec::X {} => Arc::new(Polynomial::x()),
            FieldSpec::Y {} => Arc::new(Polynomial::y()),
            FieldSpec::Z {} => Arc::new(Polynomial::z()),
            FieldSpec::Constant { value } => Arc::new(Polynomial::constant(*value)),
            FieldSpec::Polynomial { terms } => Arc::new(Polynomial::new(terms.clone())),
            FieldSpec::GaugePower { s, center } => Arc::new(GaugePower::centered(*s, (*center).into())),
            FieldSpec::Radial { p, center } => Arc::new(radial_p_harmonic_at(*p, (*center).into()).map_err(config)?),
        })
    }

    /// Fields the horizontal walk reproduces exactly in expectation.
    pub fn is_walk_invariant(&self) -> bool {
        matches!(self, FieldSpec::X {} | FieldSpec::Y {} | FieldSpec::Z {} | FieldSpec::Constant { .. })
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    A1 {},
    A2 {},
    A3 {},
    A3k {},
    Ellipsoid { aspect: f64, orientation: [f64; 3] },
    Minmax {},
    Dpp1 { p: f64 },
    Dpp2 { p: f64 },
    Dpp3 { p: f64, s: Option<f64>, a: Option<f64> },
}

impl OperatorSpec {
    pub fn build(&self) -> Result<Operator, CliError> {
        Ok(match *self {
            OperatorSpec::A1 {} => Operator::Stochastic(AvgKind::A1),
            OperatorSpec::A2 {} => Operator::Stochastic(AvgKind::A2),
            OperatorSpec::A3 {} => Operator::Stochastic(AvgKind::A3),
            OperatorSpec::A3k {} => Operator::Stochastic(AvgKind::A3K),
            OperatorSpec::Ellipsoid { aspect, orientation } => {
                Operator::Ellipsoid { aspect, orientation: orientation.into() }
            }
            OperatorSpec::Minmax {} => Operator::MinMax,
            OperatorSpec::Dpp1 { p } => dpp(DppVariant::Dpp1, p)?,
            OperatorSpec::Dpp2 { p } => dpp(DppVariant::Dpp2, p)?,
            OperatorSpec::Dpp3 { p, s, a } => dpp(dpp3_params(p, s, a)?, p)?,
        })
    }
}

fn dpp(variant: DppVariant, p: f64) -> Result<Operator, CliError> {
    variant.check_p(p).map_err(config)?;
    Ok(Operator::Dpp { variant, p })
}

/// Explicit `(s_p, a_p)` when both are given, the default pair otherwise.
pub fn dpp3_params(p: f64, s: Option<f64>, a: Option<f64>) -> Result<DppVariant, CliError> {
    let par = match (s, a) {
        (Some(s), Some(a)) => Dpp3Params::new(p, s, a),
        (None, None) => Dpp3Params::default_for(p),
        _ => return Err(CliError::Config("give both s and a for dpp3, or neither".into())),
    };
    Ok(DppVariant::Dpp3(par.map_err(config)?))
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Dpp2,
    Dpp3,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridChoice {
    Box { h_xy: Option<f64>, h_z: Option<f64> },
    Axisymmetric { h_rho: Option<f64>, n_phi: Option<usize> },
}

impl Default for GridChoice {
    fn default() -> Self {
        GridChoice::Box { h_xy: None, h_z: None }
    }
}

/// Solver settings shared by `dpp-solve` and `game`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub p: f64,
    #[serde(default = "dpp2")]
    pub variant: VariantName,
    pub s: Option<f64>,
    pub a: Option<f64>,
    #[serde(default)]
    pub grid: GridChoice,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub quadrature_nodes: Option<usize>,
    pub candidates: Option<usize>,
}

fn dpp2() -> VariantName {
    VariantName::Dpp2
}

impl SolverSpec {
    pub fn variant(&self) -> Result<DppVariant, CliError> {
        match self.variant {
            VariantName::Dpp2 => Ok(DppVariant::Dpp2),
            VariantName::Dpp3 => dpp3_params(self.p, self.s, self.a),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub operators: Vec<OperatorSpec>,
    pub fields: Vec<FieldSpec>,
    pub points: Vec<[f64; 3]>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_expand_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default = "default_expand_candidates")]
    pub candidates: usize,
}

fn default_radii() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

fn default_expand_nodes() -> usize {
    100_000
}

fn default_expand_candidates() -> usize {
    512
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DppSolveConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub domain: DomainSpec,
    pub data: FieldSpec,
    /// Field to measure the sup-node error against.
    pub reference: Option<FieldSpec>,
    /// Second data set `≥ data`; the run records whether the solutions
    /// stay ordered.
    pub upper_data: Option<FieldSpec>,
    pub eps: Vec<f64>,
    pub solver: SolverSpec,
    /// Directory for one binary grid field per ε.
    pub field_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub path: PathBuf,
    pub count: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfigSpec {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub domain: DomainSpec,
    pub field: FieldSpec,
    pub points: Vec<[f64; 3]>,
    pub eps: f64,
    pub n_traj: usize,
    pub stop_fraction: Option<f64>,
    pub max_steps: Option<usize>,
    /// Trajectories from the first point.
    pub trajectories: Option<TraceSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Greedy,
    Zero,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfigSpec {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub domain: DomainSpec,
    pub data: FieldSpec,
    pub points: Vec<[f64; 3]>,
    pub eps: f64,
    pub n_traj: usize,
    pub solver: SolverSpec,
    #[serde(default = "greedy")]
    pub strategies: StrategyName,
    pub max_steps: Option<usize>,
    pub trajectories: Option<TraceSpec>,
}

fn greedy() -> StrategyName {
    StrategyName::Greedy
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub radii: [f64; 3],
    pub p: f64,
    pub eps: f64,
    pub n_traj: usize,
    pub xi: f64,
    pub tol: Option<f64>,
    pub h_rho: Option<f64>,
    pub n_phi: Option<usize>,
    pub max_steps: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProbeName {
    Walk,
    Game,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub domain: DomainSpec,
    pub point: [f64; 3],
    pub eta: f64,
    pub delta: f64,
    pub eps: f64,
    pub n_traj: usize,
    pub probe: ProbeName,
    /// Required for the game probe.
    pub p: Option<f64>,
    pub start_ratio: Option<f64>,
    pub stop_fraction: Option<f64>,
    pub max_steps: Option<usize>,
    pub tol: Option<f64>,
    pub h_xy: Option<f64>,
    pub h_z: Option<f64>,
}

pub fn point(a: [f64; 3]) -> Point {
    a.into()
}

fn config(e: heisenberg_core::Error) -> CliError {
    CliError::Config(e.to_string())
}
