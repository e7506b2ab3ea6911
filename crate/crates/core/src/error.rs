use std::{io, path::PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A trace line that does not match `<core_id> <compute_gap> <R|W> <hex address>`.
    #[error("line {line}: invalid {field}: {reason}")]
    Parse {
        line: usize,
        field: &'static str,
        reason: String,
    },

    /// A configuration value that violates a documented invariant.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("address {address:#x} lies outside the {limit:#x}-byte physical space")]
    Address { address: u64, limit: u64 },

    #[error("synthetic workload has no rows in either locality class")]
    EmptyTrace,

    /// A metric whose formula has a zero denominator.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command-line front-end: 2 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
