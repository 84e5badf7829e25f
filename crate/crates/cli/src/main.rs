//! `smoothlab` — experiments on pinning models with tilted disorder.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or validation error,
//! 3 internal numerical failure.

use clap::{Parser, Subcommand};
use smoothlab_core::commands::{resolve_seed, resolve_workers, run_command, CommandOutput};
use smoothlab_core::config::ExperimentConfig;
use smoothlab_core::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "smoothlab",
    about = "Disordered pinning models, tilted disorder and smoothing-inequality constants",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides SMOOTHLAB_SEED and the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: config value, then machine parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output path for the main report (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the smoothing/sandwich constants over a (beta, delta) grid (CSV).
    Constants,
    /// Monte Carlo quenched free energy at one parameter point (JSON).
    FreeEnergy,
    /// Locate the critical shift h_c by Monte Carlo bisection (JSON).
    CriticalPoint,
    /// Run the named verification checks (JSON array; exit 1 on failure).
    Verify,
    /// Rare-stretch experiment with the certified lower bound (JSON).
    RareStretch,
    /// Counterexample derivative sweep for signed spins (CSV).
    Toy,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::FreeEnergy => "free-energy",
            Command::CriticalPoint => "critical-point",
            Command::Verify => "verify",
            Command::RareStretch => "rare-stretch",
            Command::Toy => "toy",
        }
    }
}

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if out.check_failures > 0 {
                eprintln!("{} check(s) failed", out.check_failures);
                ExitCode::from(EXIT_CHECK_FAILURE)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}

fn run(cli: &Cli) -> Result<CommandOutput, Error> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("missing --config PATH".into()))?;
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", config_path.display())))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let seed = resolve_seed(
        cli.seed,
        std::env::var("SMOOTHLAB_SEED").ok().as_deref(),
        &cfg,
    )?;
    let workers = resolve_workers(cli.workers, &cfg);
    let out = run_command(cli.command.name(), &cfg, seed, workers)?;
    // Main report: --out flag, then config path, else stdout.
    let report_path = cli
        .out
        .clone()
        .or_else(|| cfg.execution.out.as_ref().map(PathBuf::from));
    match &report_path {
        Some(p) => {
            std::fs::write(p, &out.report)
                .map_err(|e| Error::InvalidConfig(format!("writing {}: {e}", p.display())))?;
        }
        None => print!("{}", out.report),
    }
    if let (Some(csv), Some(path)) = (&out.replica_csv, &cfg.execution.replica_csv) {
        std::fs::write(path, csv)
            .map_err(|e| Error::InvalidConfig(format!("writing {path}: {e}")))?;
    }
    Ok(out)
}
