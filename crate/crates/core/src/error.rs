use thiserror::Error;

/// Errors produced by the sketch, predictors, and the evaluation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("sketch is empty: no observations yet")]
    EmptySketch,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate moment estimate: S4 <= S2^2")]
    DegenerateMoments,
    #[error("degenerate bias estimate: zero denominator")]
    DegenerateBias,
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid posterior: {0}")]
    InvalidPosterior(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("predictor cold start: no data and no prior bounds")]
    ColdStart,
    #[error("ingestion error: {0}")]
    Ingestion(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
