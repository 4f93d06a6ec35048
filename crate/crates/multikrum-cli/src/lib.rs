//! Command-line companion to the aggregation library: figure/table data
//! emission, point-file aggregation, search campaigns, verification, and a
//! JSON-lines run log. All file formats live here so external tooling and
//! the test suite share one reader/writer pair.

use std::fmt;

pub mod commands;
pub mod config;
pub mod formats;
pub mod runlog;

/// CLI failure split by exit code: usage/input problems exit 1,
/// verification and soundness failures exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Verification(_) => 2,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Verification(msg) => write!(f, "verification failure: {msg}"),
        }
    }
}

impl From<multikrum_core::Error> for CliError {
    fn from(err: multikrum_core::Error) -> Self {
        match err {
            multikrum_core::Error::TheoryViolation(_) => CliError::Verification(err.to_string()),
            _ => CliError::Usage(err.to_string()),
        }
    }
}

/// Annotates an IO error with the path it concerns.
pub fn io_error(path: &std::path::Path, err: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {err}", path.display()))
}
