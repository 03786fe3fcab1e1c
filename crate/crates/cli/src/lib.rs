//! Command-line front end: single-shot analysis, convergence and ratio
//! sweeps, spectrum dumps, trajectory sampling and the verification suite.
//!
//! Exit statuses: 0 success, 1 validation error, 2 numeric failure,
//! 3 verification failure.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod verify;

use std::ffi::OsString;

use clap::Parser;

use crate::args::{Cli, Command};
pub use crate::error::{exit, CliError};

/// Runs one parsed command.
pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Analyze(a) => commands::cmd_analyze(a),
        Command::SweepDiscretization(a) => commands::cmd_sweep_discretization(a),
        Command::SweepRatio(a) => commands::cmd_sweep_ratio(a),
        Command::Eigenspectrum(a) => commands::cmd_eigenspectrum(a),
        Command::Sample(a) => commands::cmd_sample(a),
        Command::Verify(a) => verify::cmd_verify(a),
    }
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::VALIDATION } else { exit::SUCCESS };
        }
    };
    match execute(&cli.command) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
