use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("ordering error: timestamp at line {line} does not increase")]
    Ordering { line: usize },
    #[error("imputation error: no available neighbour for row {row}, feature {feature}")]
    Imputation { row: usize, feature: String },
    #[error("missing values present: {0}")]
    MissingValues(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("split error: {0}")]
    Split(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("state error: {0}")]
    State(String),
    #[error("diverged: non-finite loss in epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
