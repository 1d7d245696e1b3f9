//! The `flipforge` command-line tool.

pub mod cli;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;

use std::ffi::OsString;
use std::panic::{catch_unwind, AssertUnwindSafe};

use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::{CliError, CliResult, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE};

pub const THREADS_VAR: &str = "FLIPFORGE_THREADS";

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(a) => commands::gen::run(a),
        Command::Enumerate(a) => commands::enumerate::run(a),
        Command::Search(a) => commands::search::run(a),
        Command::Train(a) => commands::train::run(a),
        Command::Eval(a) => commands::eval::run(a),
        Command::SampleFrst(a) => commands::frst::run(a),
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            flipforge_core::par::init_threads(n);
            Ok(())
        }
        _ => Err(CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{value}`"))),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| init_threads().and_then(|()| run(cli))));
    match outcome {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => EXIT_INTERNAL,
    }
}
