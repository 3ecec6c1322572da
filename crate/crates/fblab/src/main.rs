use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fblab::config::{Experiment, ExperimentConfig};
use fblab::experiments::{self, RunSummary};
use fblab::CliError;

/// Experiment runner for the free boundary laboratory.
#[derive(Parser)]
#[command(name = "fblab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate closed-form half-plane fields against their analytic values.
    ExactValidate(RunArgs),
    /// Sample monotone radial profiles and write audit reports.
    MonotonicityAudit(RunArgs),
    /// Sweep contact angles on matched capillary/one-phase pairs and
    /// tabulate convergence gaps.
    ThetaSweep(RunArgs),
    /// Tabulate near-wall curvature ratios across contact angles.
    CurvatureSweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for output artifacts (created if absent).
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (expected, args) = match &cli.command {
        Command::ExactValidate(args) => (Experiment::ExactValidate, args),
        Command::MonotonicityAudit(args) => (Experiment::MonotonicityAudit, args),
        Command::ThetaSweep(args) => (Experiment::ThetaSweep, args),
        Command::CurvatureSweep(args) => (Experiment::CurvatureSweep, args),
    };
    match execute(expected, args) {
        Ok(summary) => {
            println!(
                "{expected}: {} rows, {} warnings",
                summary.rows, summary.warnings
            );
            for artifact in &summary.artifacts {
                println!("wrote {}", artifact.display());
            }
            ExitCode::SUCCESS
        }
        Err(err @ CliError::Config(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        Err(err @ CliError::Precondition(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}

fn execute(expected: Experiment, args: &RunArgs) -> Result<RunSummary, CliError> {
    let config = ExperimentConfig::load(&args.config)?;
    if config.experiment != expected {
        return Err(CliError::Config(format!(
            "config declares experiment '{}' but the '{expected}' subcommand was invoked",
            config.experiment
        )));
    }
    experiments::run(&config, &args.out)
}
