//! `sumlab`: batch runner for norm estimates, verification suites and σ sweeps.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CommandError;
use config::ScenarioConfig;

#[derive(Parser, Debug)]
#[command(name = "sumlab", version, about = "Summing-norm estimates and inequality verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON scenario config
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's `out`, else the working directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces every check tolerance
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lower-bound (or exact, when an oracle applies) ideal norm of an operator
    EstimateNorm {
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite over seeded random instances
    Verify {
        /// lemma_le, leinc, sandwich, prinint, q11, jp or hilbert
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate Φ, the mixed sup and q11 over a σ grid
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<(ScenarioConfig, PathBuf), CommandError> {
    let mut config = ScenarioConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(t) = common.tolerance {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(config::invalid("tolerance", format!("must be >= 0, got {t}")).into());
        }
        config.override_tolerance(t);
    }
    let out = common.out.clone().or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    Ok((config, out))
}

fn run(cli: &Cli) -> Result<report::RunReport, CommandError> {
    match &cli.command {
        Command::EstimateNorm { common } => {
            let (config, out) = load(common)?;
            commands::cmd_estimate_norm(&config, &out)
        }
        Command::Verify { suite, common } => {
            let (config, out) = load(common)?;
            commands::cmd_verify(&config, suite, &out)
        }
        Command::Sweep { common } => {
            let (config, out) = load(common)?;
            commands::cmd_sweep(&config, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let failed = report.checks.iter().filter(|c| !c.pass).count();
            println!(
                "{}: {} checks, {} failed, {} estimates",
                report.command,
                report.checks.len(),
                failed,
                report.estimates.len()
            );
            for e in &report.estimates {
                println!("estimate {:.16e} ({:?}, {})", e.value, e.certification, e.diagnostics.method);
            }
            if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
