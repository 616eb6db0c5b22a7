//! Library surface of the `volterra` binary: argument grammar, subcommand
//! execution, and the exit-code contract (0 success, 1 usage error,
//! 2 numerical error with best bounds reported).

pub mod args;
pub mod commands;

use clap::Parser;
use std::ffi::OsString;

pub use args::{Cli, Command};
pub use commands::{run, RunOutput};

#[derive(Debug)]
pub enum CliError {
    /// Malformed invocation; the message names the offending flag.
    Usage(String),
    /// The computation failed (e.g. iteration cap); the message carries the
    /// best certified bounds obtained.
    Numeric(String),
}

/// Full run for a process entry point; returns the exit status.
pub fn main_impl<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 1;
        }
    };
    match run(cli.command) {
        Ok(out) => {
            if let Some(path) = &out.path {
                if let Err(e) = std::fs::write(path, &out.text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 1;
                }
            } else {
                print!("{}", out.text);
            }
            0
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numerical error: {msg}");
            2
        }
    }
}

/// In-process run that captures the rendered output (used by the tests to
/// assert byte-identical determinism).
pub fn run_to_string(argv: &[&str]) -> Result<String, CliError> {
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli.command).map(|out| out.text)
}
