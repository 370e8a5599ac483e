use thiserror::Error;

/// Errors produced by the library.
///
/// Each variant maps onto one of the exit-code classes used by the command
/// line front end, see [`Error::class`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite entry at {context}")]
    NonFinite { context: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular matrix: numerical rank {rank} < {expected}")]
    Singular { rank: usize, expected: usize },

    #[error("points not in general position (indices {indices:?}): {reason}")]
    Degenerate { indices: Vec<usize>, reason: String },

    #[error("polytope is not simplicial")]
    NotSimplicial,

    #[error("not a square or tall matrix: {rows}x{cols}")]
    WideMatrix { rows: usize, cols: usize },

    #[error("cap exceeded: {what} = {value} > {cap}")]
    CapExceeded { what: String, value: u128, cap: u128 },

    #[error("no convergence after {iterations} iterations: {reason}")]
    NotConverged { iterations: usize, reason: String },

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

/// Coarse classification of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    NonConvergence,
    Guard,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotConverged { .. } => ErrorClass::NonConvergence,
            Error::CapExceeded { .. } | Error::InvariantViolated(_) => ErrorClass::Guard,
            _ => ErrorClass::Input,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn cap(what: impl Into<String>, value: u128, cap: u128) -> Self {
        Error::CapExceeded {
            what: what.into(),
            value,
            cap,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
