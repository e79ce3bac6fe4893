use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FppError {
    #[error("points {0} and {1} are not nearest neighbours")]
    NotAdjacent(String, String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("constant unavailable: {0}")]
    ConstantUnavailable(String),
    #[error("path too short: {len} edges, truncation needs more than {needed}")]
    PathTooShort { len: usize, needed: usize },
    #[error("enumeration unsupported for zero weights")]
    ZeroWeightEnumeration,
    #[error("point {0} lies outside the simulation window")]
    OutOfWindow(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error at column {col}: {msg} (near `{token}`)")]
    Parse { col: usize, token: String, msg: String },
    #[error("kesten shell construction failed: {0}")]
    ShellFailure(String),
}

pub type Result<T> = std::result::Result<T, FppError>;
