use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use heisenberg_cli::{run_str, write_records, CliError, Command, Format, Overrides};

/// Reproducible experiments on the Heisenberg group.
#[derive(Parser, Debug)]
#[command(name = "heisenberg", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when absent here and in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(&cli.config).map_err(|e| CliError::Io(format!("{}: {e}", cli.config.display())))?;
    let (records, cfg_out) = run_str(cli.command, &text, Overrides { seed: cli.seed, threads: cli.threads })?;
    match cli.out.clone().or(cfg_out) {
        Some(path) => {
            let f = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            write_records(&records, cli.format, &mut w)?;
            w.flush().map_err(|e| CliError::Io(e.to_string()))
        }
        None => write_records(&records, cli.format, std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("heisenberg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
