use thiserror::Error;

/// Errors raised by the analysis engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("schedule yields {found} checkpoint(s) up to horizon {horizon}; at least 2 are required")]
    EmptySchedule { horizon: u64, found: usize },

    #[error("horizon must be at least {min}, got {got}")]
    HorizonTooSmall { min: u64, got: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("space mismatch: expected {expected}, got {got}")]
    SpaceMismatch { expected: String, got: String },

    #[error("p-norms are only defined on dense elements")]
    PNormOnSparse,

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("only {found} member(s) of {set} found below the probe cap {cap}; member #{wanted} requested")]
    HorizonExhausted { set: String, wanted: u64, found: u64, cap: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("unknown theorem check `{0}`")]
    UnknownTheorem(String),

    #[error("parse error at column {column}: {message}\n  {input}\n  {caret}")]
    Parse { column: usize, message: String, input: String, caret: String },
}

pub type Result<T> = std::result::Result<T, Error>;
