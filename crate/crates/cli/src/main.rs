//! `biasci`: coverage curves, calibrated critical values, confidence
//! intervals, length tables and simulation studies for intervals centered at
//! a biased, lower-MSE estimator.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::Format;

/// Environment variable supplying the default simulation seed.
pub const SEED_ENV: &str = "BIASCI_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "biasci",
    version,
    about = "Confidence intervals around biased, lower-MSE estimators"
)]
struct Cli {
    /// Log summaries to stderr (6 significant digits).
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format; defaults to csv for tables and json for records.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coverage of `theta2_hat +- z s1` along the equal-MSE frontier.
    Cp(commands::CpArgs),
    /// Solve for the calibrated critical value.
    Calibrate(commands::CalibrateArgs),
    /// Build confidence intervals from estimates and standard errors.
    Ci(commands::CiArgs),
    /// Calibrated length relative to the benchmark over a grid of s2/s1.
    Lengths(commands::LengthsArgs),
    /// Monte Carlo coverage study.
    Simulate(commands::SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    JointNormal,
    Demo,
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const ASSUMPTION: u8 = 3;
    pub const NUMERICAL: u8 = 4;
}

fn code_for(err: &biasci::Error) -> u8 {
    use biasci::Error::*;
    match err {
        Domain(_) | Parse(_) | Degenerate(_) => exit::USAGE,
        MseViolation { .. } => exit::ASSUMPTION,
        Numerical(_) => exit::NUMERICAL,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            });
        }
    };
    let filter = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(filter)).init();

    let result = match &cli.command {
        Command::Cp(a) => commands::cp(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Ci(a) => commands::ci(a),
        Command::Lengths(a) => commands::lengths(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code_for(&e))
        }
    }
}
