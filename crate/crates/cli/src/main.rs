//! `nevkit`: batch front-end for characteristic tables, the verification
//! suite, the divergence family and the classical check.
//!
//! Exit codes: 0 all checks hold, 1 some check failed, 2 malformed or
//! invalid input, 3 I/O error.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, RunConfig};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(cli)?;
    let out = commands::run(&cfg)?;
    output::emit(cfg.out.as_deref(), cfg.timestamp, &out.body)?;
    eprintln!("{}", out.summary);
    if out.passed {
        Ok(())
    } else {
        Err(CliError::Failed(out.summary))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nevkit: {e}");
            e.exit_code()
        }
    }
}
