//! CLI failures and their exit codes.

use std::path::{Path, PathBuf};

use serde::Serialize;
use stackliver::ErrorKind;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed bundle: {0}")]
    Bundle(String),
    #[error("bundle format version {found} is newer than supported version {supported}")]
    VersionMismatch { found: u64, supported: u64 },
    #[error(transparent)]
    Core(#[from] stackliver::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Bundle(_) | CliError::VersionMismatch { .. } => 3,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numeric => 4,
            },
        }
    }

    pub fn category(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "data",
            _ => "numeric",
        }
    }
}

/// Machine-readable failure record written to stderr and `error.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub category: String,
    pub exit_code: i32,
    pub message: String,
    pub stage: Option<String>,
}

impl ErrorRecord {
    pub fn new(err: &CliError, stage: Option<&str>) -> Self {
        Self {
            category: err.category().to_string(),
            exit_code: err.exit_code(),
            message: err.to_string(),
            stage: stage.map(str::to_string),
        }
    }
}
