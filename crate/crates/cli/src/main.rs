//! Command-line front end for the two-stage maximum score estimator.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "twostage", version, about = "Two-stage maximum score estimation and Monte Carlo studies")]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Overrides the seed given in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo study and write summary.csv and edf.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the outcome coefficient on a dataset CSV.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Directory for estimate.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the eighth-order kernel coefficients and moments.
    Kernelcheck,
    /// Draw one sample from the simulation design and write dataset.csv.
    ExportDgp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Compute(format!("thread pool: {e}")))?;
    match &cli.command {
        Command::Simulate { config, out } => commands::simulate(config, out, cli.seed),
        Command::Estimate { data, config, out } => commands::estimate(data, config, out.as_deref(), cli.seed),
        Command::Kernelcheck => commands::kernelcheck(),
        Command::ExportDgp { config, out } => commands::export_dgp(config, out, cli.seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("twostage: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
