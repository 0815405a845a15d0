//! `rpcap`: capacity estimates, protocol simulations, invariant suites and
//! classical baselines for random-parameter quantum channels.

mod commands;
mod manifest;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BaselineArgs, CapacityArgs, SimulateArgs, VerifyArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "rpcap", version, about = "Entanglement-assisted capacities of random-parameter quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the capacity under one side-information scenario.
    Capacity(CapacityArgs),
    /// Run the finite-blocklength coding schemes exactly.
    Simulate(SimulateArgs),
    /// Run an invariant suite (algebra, packing, covering).
    Verify(VerifyArgs),
    /// Classical Shannon-strategy and Gel'fand-Pinsker values.
    Baseline(BaselineArgs),
}

#[derive(Debug)]
pub enum CliError {
    Core(rpcap_core::Error),
    VerificationFailed(String),
}

impl From<rpcap_core::Error> for CliError {
    fn from(e: rpcap_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(rpcap_core::Error::Io(e))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerificationFailed(_) => EXIT_VERIFY_FAILED,
            CliError::Core(rpcap_core::Error::Numeric(_)) => EXIT_NUMERIC,
            CliError::Core(_) => EXIT_INPUT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::VerificationFailed(name) => write!(f, "verification failed: first failing check {name}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Capacity(a) => commands::capacity(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
        Command::Baseline(a) => commands::baseline(a),
    };
    match outcome {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
