use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong while building, solving or verifying an instance.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must live in the same space do not.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Parameters that do not describe a valid object.
    #[error("validation error: {0}")]
    Validation(String),

    /// Uniform sampling was requested from an unbounded piece.
    #[error("unsupported sampling: {0} pieces are unbounded")]
    UnsupportedSampling(&'static str),

    #[error("combination budget exceeded: {combos} combinations > budget {budget}")]
    BudgetExceeded { combos: u128, budget: u128 },

    /// Problem file could not be parsed. Line and column are 1-based.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// An error tied to a place in a problem file. Line and column are 1-based.
    #[error("line {line}, column {column}: {source}")]
    Located {
        line: usize,
        column: usize,
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    /// The underlying error, with any file location stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Located { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
