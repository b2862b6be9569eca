use thiserror::Error;

/// Errors surfaced by the numerical operators.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the operator's domain (time out of range,
    /// mismatched lengths, empty inputs, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A declared invariant failed validation on sampled data.
    #[error("validation failed: {0}")]
    Validation(String),
    /// Exhaustive control enumeration would exceed the desk-scale cap.
    #[error("candidate explosion: {candidates} controls exceed the cap of {cap}; use greedy mode")]
    CandidateExplosion { candidates: u128, cap: u128 },
    /// The lifted state dimension exceeds what grid solves support.
    #[error("lifted dimension {dim} exceeds the grid cap of {cap}; use the Monte-Carlo estimators")]
    DimensionCap { dim: usize, cap: usize },
    #[error("csv parse error at line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
