mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Bad input files or flags.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

/// A simulated score disagrees with the reference DP.
#[derive(Debug, thiserror::Error)]
#[error("oracle mismatch: {0}")]
pub struct OracleMismatch(pub String);

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ORACLE: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<OracleMismatch>().is_some() {
        return EXIT_ORACLE;
    }
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<recam::Error>() {
        Some(
            recam::Error::Config(_)
            | recam::Error::Parse { .. }
            | recam::Error::ScoreWidth { .. }
            | recam::Error::SymbolOutOfAlphabet { .. }
            | recam::Error::AlphabetMismatch(_)
            | recam::Error::SequenceTooLong { .. }
            | recam::Error::CapacityExceeded { .. }
            | recam::Error::TopKTooLarge { .. }
            | recam::Error::InconsistentTable(_)
            | recam::Error::InsufficientColumns { .. }
            | recam::Error::InfeasibleColocation(_)
            | recam::Error::UnallocatedField(_)
            | recam::Error::Hazard(_)
            | recam::Error::NotApplicable(_)
            | recam::Error::EmptyDatabase,
        ) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Align(a) => commands::cmd_align(a),
        Command::Search(a) => commands::cmd_search(a),
        Command::Microcode(a) => commands::cmd_microcode(a),
        Command::Report(a) => commands::cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
