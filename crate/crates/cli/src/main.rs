// SPDX-License-Identifier: Apache-2.0

//! `cqzl`: bounds, constructions and verification for zero-error list
//! decoding over pure-state classical-quantum channels.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 numerical certificate failure, 4 construction failure.

mod args;
mod commands;
mod output;
mod sweep;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::output::{CliError, Status};

fn run(cli: &Cli) -> Result<Status, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::input(format!("thread pool: {e}")))?;
    match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Construct(a) => commands::construct(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => sweep::sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Status::InvalidInput.into()
            } else {
                Status::Ok.into()
            };
        }
    };
    match run(&cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.status.into()
        }
    }
}
