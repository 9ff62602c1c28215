use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value {value} for {what}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("{what} must be positive, got {value}")]
    NotPositive { what: &'static str, value: f64 },

    #[error("negative radius {0}")]
    NegativeRadius(f64),

    #[error("{what}: need at least {needed} points, got {got}")]
    TooFewPoints {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("{what} (size {size}) exceeds the bound {bound}")]
    SizeLimit {
        what: &'static str,
        size: u128,
        bound: u128,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty point file {path}")]
    EmptyFile { path: String },

    #[error("unknown alpha token {0:?} (expected a decimal or sqrt2, sqrt2_over_5, golden)")]
    UnknownAlpha(String),

    #[error("generate does not support file-backed specs; use load")]
    GenerateFromFile,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
