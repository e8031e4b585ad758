//! Command-line front end for the protoscribe pipeline.

pub mod args;
pub mod commands;
pub mod demo;
pub mod error;
pub mod io;
pub mod manifest;

pub use args::{Cli, Command};
pub use error::CliError;

use clap::Parser;

/// Parses `argv` and runs the command. Usage errors map to exit code 2.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("protoscribe: {e}");
            e.exit_code()
        }
    }
}
