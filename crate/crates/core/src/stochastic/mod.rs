//! Simulators for the horizontal ε-walk and the tug-of-war with noise.
//!
//! Every trajectory `i` draws from its own stream `rng::stream(base_seed, i)`
//! and results are reduced in index order, so estimates do not depend on
//! the number of threads.

mod experiments;
mod game;
mod strategy;
mod trace;
mod walk;

pub use experiments::{
    annulus_bound, annulus_experiment, regularity_probe, stopping_time_tail, AnnulusParams, AnnulusReport, ProbeKind,
    RegularityParams, RegularityReport, TailFit,
};
pub use game::{estimate_game_value, run_game, run_game_traced, GameConfig, GameOutcome};
pub use strategy::{greedy_strategy, FnStrategy, GreedyStrategy, Mode, Strategy, ZeroStrategy, GREEDY_CANDIDATES};
pub use trace::{record_game_trajectories, record_walk_trajectories, write_trajectory_csv, TraceRow};
pub use walk::{estimate_walk_value, run_walk, run_walk_traced, walk_step, WalkConfig, WalkOutcome};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub truncated_count: usize,
}

impl Estimate {
    /// Sample mean and `s/√n`, accumulated in index order around the first
    /// sample (a constant sample gives its value and a zero error exactly).
    pub fn from_samples(samples: &[f64], truncated_count: usize) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::invalid("an estimate needs at least one sample"));
        }
        let v0 = samples[0];
        let shift: f64 = samples.iter().map(|v| v - v0).sum::<f64>() / n as f64;
        let mean = v0 + shift;
        let std_error = if n > 1 {
            let ss: f64 = samples.iter().map(|v| (v - v0 - shift).powi(2)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Estimate { mean, std_error, n, truncated_count: truncated_count.min(n) })
    }

    /// `|mean - target| ≤ k·std_error + slack`.
    pub fn agrees_with(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + slack
    }

    pub fn truncated_fraction(&self) -> f64 {
        self.truncated_count as f64 / self.n as f64
    }
}

/// Runs `task(i, stream_i)` for `i < n` in parallel and returns the
/// results in index order (the first error by index wins).
pub(crate) fn run_indexed<T, F>(n: usize, base_seed: u64, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    let out: Vec<Result<T>> = (0..n).into_par_iter().map(|i| task(i, &mut rng::stream(base_seed, i as u64))).collect();
    out.into_iter().collect()
}
