use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("horizontal gradient {norm:e} is below the degeneracy floor")]
    DegenerateGradient { norm: f64 },

    #[error("gauge vanishes at the origin")]
    GaugeZero,

    #[error("exponent p = {p} outside the admissible range {range}")]
    ExponentOutOfRange { p: f64, range: &'static str },

    #[error("parameter constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("field evaluation failed at ({x}, {y}, {z})")]
    Evaluation { x: f64, y: f64, z: f64 },

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("point is not on the domain boundary (distance to complement {dist:e})")]
    NotOnBoundary { dist: f64 },

    #[error("query ({x}, {y}, {z}) falls outside the grid")]
    OutsideGrid { x: f64, y: f64, z: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("iterate decreased by {drop:e} at node {node} during sweep {sweep}")]
    MonotonicityViolated { sweep: usize, node: usize, drop: f64 },

    #[error("walk left the domain at step {step}")]
    ConfinementViolated { step: usize },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("malformed grid data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub(crate) fn ensure_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { what, value })
    }
}
