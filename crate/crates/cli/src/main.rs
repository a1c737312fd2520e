use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

/// Throughput toolkit for an energy-accumulating two-way relay.
#[derive(Parser)]
#[command(name = "psea", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form throughput for the configured operating point.
    Analyze(Common),
    /// Monte Carlo throughput estimate.
    Simulate(Common),
    /// Analytical + simulated throughput along the configured axis (CSV).
    Sweep(Common),
    /// Exhaustive search over the splitting ratio and discharge threshold.
    Optimize(Common),
    /// Optimized throughput of all three schemes per power point (CSV).
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Cross-check closed forms against quadrature references.
    #[arg(long)]
    self_check: bool,
}

/// Config/usage problems exit 2, numerical failures exit 3.
#[derive(Debug, Clone)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    fn config(msg: String) -> Self {
        CliError::Config(msg)
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<psea::Error> for CliError {
    fn from(e: psea::Error) -> Self {
        use psea::Error::*;
        match e {
            Domain { .. } | InvalidModel(_) | SimConfig(_) => CliError::Config(e.to_string()),
            SingularChain(_) | NegativeStationary { .. } | Unstable(_) => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match &cli.cmd {
        Cmd::Analyze(c) => commands::analyze(c),
        Cmd::Simulate(c) => commands::simulate(c),
        Cmd::Sweep(c) => commands::sweep(c),
        Cmd::Optimize(c) => commands::optimize(c),
        Cmd::Compare(c) => commands::compare(c),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
