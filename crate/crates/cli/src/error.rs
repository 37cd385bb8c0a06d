//! CLI error taxonomy and exit codes.
//!
//! Every failure is folded into one of four buckets so scripts can branch on
//! the exit code: 2 for configuration problems, 3 for data problems, 4 for
//! optimization targets the instrument bounds cannot reach, and 1 for
//! anything environmental (I/O).

use std::path::Path;

use ccfin_core::{CcbError, DataError, ModelError, OptimizeError, StructuringError};
use thiserror::Error;

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn io(context: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io(format!("{}: {source}", context.as_ref().display()))
    }
}

// Model parameters always originate in the config document, so model errors
// are config errors; structuring errors mean the requested target cannot be
// met within the instrument's bounds.
impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<StructuringError> for CliError {
    fn from(e: StructuringError) -> Self {
        CliError::Infeasible(e.to_string())
    }
}

impl From<OptimizeError> for CliError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Model(m) => m.into(),
            OptimizeError::Structuring(s) => s.into(),
        }
    }
}

impl From<CcbError> for CliError {
    fn from(e: CcbError) -> Self {
        match e {
            CcbError::Model(m) => m.into(),
            CcbError::Data(d) => d.into(),
            CcbError::Structuring(s) => s.into(),
        }
    }
}
