//! `gpdisc`: generate synthetic data, sample or optimize, and report.

mod commands;
mod data;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gpdisc::inference::Scenario;

use commands::OptimizeScenario;
use error::CliResult;

/// Environment variable holding the log filter (e.g. `info`, `gpdisc=debug`).
const LOG_ENV: &str = "GPDISC_LOG";

#[derive(Debug, Parser)]
#[command(name = "gpdisc", version, about = "Bayesian inversion with Gaussian-process model discrepancy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write synthetic streams, truth and a dataset manifest.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the posterior and write the archive.
    Invert {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_scenario)]
        scenario: Option<Scenario>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Minimize the negative log density by BFGS.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        scenario: Option<OptimizeScenario>,
    },
    /// Parameter summaries, convergence diagnostics and discrepancy summary.
    Report {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predictive bands of model and process predictions.
    Predict {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: gpdisc::Error| e.to_string())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate { config, out } => commands::generate(&config, &out),
        Command::Invert {
            config,
            data,
            out,
            scenario,
            seed,
        } => commands::invert(&config, &data, &out, scenario, seed),
        Command::Optimize {
            config,
            data,
            out,
            scenario,
        } => commands::optimize(&config, &data, &out, scenario),
        Command::Report { archive, out } => commands::report(&archive, &out),
        Command::Predict { archive, data, out } => commands::predict(&archive, &data, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
