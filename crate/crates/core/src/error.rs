use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero polynomial has no vanishing order")]
    ZeroPolynomial,

    #[error("point lies outside the declared polydisc")]
    OutsideDomain,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("Gram matrix singular at degree cap {cap} (eigenvalue ratio {ratio:e})")]
    Conditioning { cap: usize, ratio: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no admissible parameter in grid; blocked values: {0:?}")]
    GridExhausted(Vec<String>),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("schema version mismatch: expected {expected}, found {found}")]
    SchemaVersion { expected: u32, found: u32 },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
