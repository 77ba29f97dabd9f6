use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReachError {
    /// Caller violated a precondition (dimension mismatch, bad parameter, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed QASM or channel file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Register wider than the configured qubit cap.
    #[error("qubit cap exceeded: {requested} qubits requested, cap is {cap}")]
    CapExceeded { requested: usize, cap: usize },

    /// An internal invariant failed at runtime.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl ReachError {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        ReachError::Usage(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        ReachError::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ReachError>;
