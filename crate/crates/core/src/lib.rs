//! Numerics on the first Heisenberg group: group arithmetic, horizontal
//! calculus, mean value operators, a monotone solver for the discrete
//! dynamic programming principle of the p-sub-Laplacian, and simulators for
//! the horizontal random walk and tug-of-war with noise.

pub mod averaging;
pub mod calculus;
pub mod domains;
pub mod dpp;
pub mod error;
pub mod hgroup;
pub mod rng;
pub mod stochastic;

pub use error::{Error, Result};
pub use hgroup::Point;
