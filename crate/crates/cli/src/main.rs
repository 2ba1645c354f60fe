//! `nonsym`: runs declarative scenarios and writes reproducible artifacts.
//!
//! Exit status: 0 on success, 2 for configuration errors (with the field
//! path), 3 for numerical failures (with the stage), 1 for I/O.

mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nonsym_core::ScenarioError;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "nonsym", version, about = "Nonlocal operators with nonsymmetric kernels: scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Artifact directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides `harness.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `harness.ensemble`.
    #[arg(long)]
    ensemble: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measures one structural assumption of the kernel.
    CheckKernel {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(nonsym_core::scenario::ASSUMPTIONS))]
        assumption: String,
    },
    /// Assembles the discrete operator and reports its invariants.
    Assemble {
        #[command(flatten)]
        common: Common,
        /// Writes the dense operator matrix as CSV.
        #[arg(long)]
        dump_form: Option<PathBuf>,
    },
    /// Solves the parabolic problem for ensemble member 0.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Weak Harnack quotients over the ensemble.
    Harnack {
        #[command(flatten)]
        common: Common,
    },
    /// Hölder exponent fits over the ensemble.
    Hoelder {
        #[command(flatten)]
        common: Common,
    },
    /// Caccioppoli audits of random positive fields.
    Caccioppoli {
        #[command(flatten)]
        common: Common,
    },
    /// Randomized sweep of the scalar inequalities.
    AlgebraTests {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Samples per inequality.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Local limits, resolvent gaps and Gårding margins as alpha grows.
    Mosco {
        #[command(flatten)]
        common: Common,
        /// Overrides `harness.mosco.alphas`.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error("numerical failure in stage {stage}: {message}")]
    Numerical { stage: &'static str, message: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Config { path, message } => CliError::Config { path, message },
            other => CliError::Numerical { stage: other.stage(), message: other.to_string() },
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
