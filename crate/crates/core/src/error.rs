use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlhError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("metric is singular at {0}")]
    Singularity(String),
    #[error("unsupported: {0}")]
    Feature(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("solver failed: {reason} (damping trace: {trace:?})")]
    Solver { reason: String, trace: Vec<f64> },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("spec error: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, AlhError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(AlhError::Domain(msg.into()))
}
