//! Batch experiments over `heisenberg-core` driven by JSON configs.

pub mod commands;
pub mod config;
pub mod record;

use std::path::Path;

use heisenberg_core::Error;

pub use record::{write_records, Format, ResultRecord};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Parameter errors become config errors; everything the numerics can
/// fail on at run time is a numerical failure.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonPositive { .. }
            | Error::InvalidArgument(_)
            | Error::ExponentOutOfRange { .. }
            | Error::ConstraintViolation(_)
            | Error::OutsideDomain
            | Error::NotOnBoundary { .. }
            | Error::ConfigInvalid(_) => CliError::Config(e.to_string()),
            Error::Format(m) => CliError::Io(m),
            e => CliError::Numerical(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Expand,
    DppSolve,
    Walk,
    Game,
    Annulus,
    Regularity,
}

/// Command-line overrides of the config's `seed` and `threads`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Loads the config at `path` and runs `cmd` on a pool of the requested
/// size (all cores by default). The seed defaults to 0.
pub fn run_file(cmd: Command, path: &Path, ov: Overrides) -> Result<Vec<ResultRecord>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    run_str(cmd, &text, ov).map(|(r, _)| r)
}

/// As [`run_file`] on config text; also returns the config's `out` path.
pub fn run_str(
    cmd: Command,
    text: &str,
    ov: Overrides,
) -> Result<(Vec<ResultRecord>, Option<std::path::PathBuf>), CliError> {
    use commands::*;
    use config::{parse, Common};
    fn go<C: Common + Sync + serde::de::DeserializeOwned>(
        text: &str,
        ov: Overrides,
        f: fn(&C, u64) -> Result<Vec<ResultRecord>, CliError>,
    ) -> Result<(Vec<ResultRecord>, Option<std::path::PathBuf>), CliError> {
        let cfg: C = parse(text)?;
        let seed = ov.seed.or(cfg.seed()).unwrap_or(0);
        let threads = ov.threads.or(cfg.threads()).unwrap_or(0);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        let records = pool.install(|| f(&cfg, seed))?;
        Ok((records, cfg.out().map(Path::to_path_buf)))
    }
    match cmd {
        Command::Expand => go(text, ov, expand),
        Command::DppSolve => go(text, ov, dpp_solve),
        Command::Walk => go(text, ov, walk),
        Command::Game => go(text, ov, game),
        Command::Annulus => go(text, ov, annulus),
        Command::Regularity => go(text, ov, regularity),
    }
}
