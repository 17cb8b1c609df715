use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("tax account must be positive, got {0}")]
    DegenerateTax(f64),

    #[error("kept share {0} lies outside [0, 1]")]
    ShareOutOfRange(f64),

    #[error("population size must be even and at least 2, got {0}")]
    OddPopulation(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Schema {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("subject {session_id}/{subject_id} has {count} stable records, expected exactly 1")]
    MissingStable {
        session_id: u32,
        subject_id: u32,
        count: usize,
    },

    #[error("{0}")]
    Empty(String),

    #[error("unknown {kind} `{value}`")]
    UnknownId { kind: &'static str, value: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
