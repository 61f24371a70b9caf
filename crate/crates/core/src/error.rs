use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("trace format error at line {line}: {message}")]
    TraceFormat { line: usize, message: String },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("cost model error: {0}")]
    Cost(String),

    #[error("stream error: {0}")]
    Stream(String),

    #[error("weight file error: {0}")]
    WeightFormat(String),

    #[error("metadata mismatch: {0}")]
    MetadataMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
