use std::path::PathBuf;

use thiserror::Error;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or inconsistent input data.
    Data,
    /// A numerical procedure failed (factorization, underflow, empty clusters).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invariant violated for `{field}`: {reason}")]
    Invariant { field: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("component {component} is empty (effective count {count:e})")]
    EmptyComponent { component: usize, count: f64 },

    #[error("{path}: line {line}: {reason}")]
    Parse { path: String, line: usize, reason: String },

    #[error("{path}: missing section `{section}`")]
    MissingSection { path: String, section: String },

    #[error("{path}: unsupported format version `{found}` (expected `{expected}`)")]
    VersionMismatch {
        path: String,
        found: String,
        expected: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Numerical(_) | Error::EmptyComponent { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn invariant(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invariant {
            field: field.into(),
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

pub type Result<T, E = Error> = std::result::Result<T, E>;
