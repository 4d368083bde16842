use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration ({} violation(s))", violations.len())]
    Config { violations: Vec<String> },
    #[error("cannot access {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("numerical failure: {0}")]
    Numerical(#[from] lgatom::Error),
    #[error("oracle mismatch: max |difference| {max_difference:e} exceeds {tolerance:e}")]
    OracleMismatch { max_difference: f64, tolerance: f64 },
}

/// Shape of the JSON written to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl CliError {
    pub fn config(violations: Vec<String>) -> Self {
        CliError::Config { violations }
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::OracleMismatch { .. } => 4,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let (kind, violations) = match self {
            CliError::Config { violations } => ("config", violations.clone()),
            CliError::Io { .. } => ("io", Vec::new()),
            CliError::Numerical(_) => ("numerical", Vec::new()),
            CliError::OracleMismatch { .. } => ("oracle_mismatch", Vec::new()),
        };
        ErrorReport {
            error: kind,
            exit_code: self.exit_code(),
            message: self.to_string(),
            violations,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
