// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use cqzl_core::io::{round_significant, to_canonical_json, SIGNIFICANT_DIGITS};
use serde::Serialize;

use crate::args::{Format, OutputArgs};

/// Stable process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    VerificationFailed = 1,
    InvalidInput = 2,
    CertificateFailed = 3,
    ConstructionFailed = 4,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        ExitCode::from(s as u8)
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn new(status: Status, message: impl fmt::Display) -> Self {
        CliError {
            status,
            message: message.to_string(),
        }
    }

    pub fn input(message: impl fmt::Display) -> Self {
        Self::new(Status::InvalidInput, message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Writes `text` to `--out` or stdout.
pub fn emit(output: &OutputArgs, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn json_only(output: &OutputArgs, command: &str) -> CliResult<()> {
    if output.format == Some(Format::Csv) {
        return Err(CliError::input(format!("{command} supports only --format json")));
    }
    Ok(())
}

pub fn emit_json<T: Serialize>(output: &OutputArgs, value: &T) -> CliResult<()> {
    emit(output, &to_canonical_json(value))
}

/// CSV with a leading `#schema=1` comment line.
pub fn to_csv(family: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::input(e))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::input(e))?;
    }
    let body = w.into_inner().map_err(|e| CliError::input(e))?;
    let body = String::from_utf8(body).expect("CSV fields are UTF-8");
    Ok(format!("#schema=1 family={family}\n{body}"))
}

pub fn csv_float(x: f64) -> String {
    format!("{}", round_significant(x, SIGNIFICANT_DIGITS))
}

pub fn csv_option(x: Option<f64>) -> String {
    x.map(csv_float).unwrap_or_default()
}
