use std::path::{Path, PathBuf};

use hivewatch_core::stream_io::FormatError;
use hivewatch_telemetry::TelemetryError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const FORMAT: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const IO: i32 = 5;
    pub const NETWORK: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", .path.display())]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
    #[error("{0}")]
    Validation(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Network(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Format { .. } => exit::FORMAT,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Io { .. } => exit::IO,
            CliError::Network(_) => exit::NETWORK,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Format errors that are really read failures keep the I/O code.
    pub fn format(path: &Path, source: FormatError) -> Self {
        match source {
            FormatError::Io(e) => CliError::io(path, e),
            source => CliError::Format {
                path: path.to_path_buf(),
                source,
            },
        }
    }

    pub fn validation(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<TelemetryError> for CliError {
    fn from(e: TelemetryError) -> Self {
        match e {
            TelemetryError::Io(source) => CliError::Io {
                path: PathBuf::from("<telemetry store>"),
                source,
            },
            TelemetryError::Corrupt { .. } | TelemetryError::Config(_) => {
                CliError::Validation(e.to_string())
            }
            other => CliError::Network(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
