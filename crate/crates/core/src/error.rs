use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Runtime,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("ingestion error at row {row}, column `{column}`: {message}")]
    Ingestion {
        row: usize,
        column: String,
        message: String,
    },

    #[error("label error at row {row}: `{value}` is not 0 or 1")]
    Label { row: usize, value: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("no eligible users")]
    NoEligibleUsers,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid sample weight at position {index}: {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("sample weights sum to zero")]
    ZeroWeights,

    #[error("lambda {0} is outside [0, 1]")]
    LambdaOutOfRange(f64),

    #[error("compatibility is undefined: the pre-update model is correct on no instance")]
    UndefinedCompatibility,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("malformed {what}: {message}")]
    Malformed { what: &'static str, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) => ErrorClass::Config,
            Error::MissingColumn(_)
            | Error::Schema(_)
            | Error::Ingestion { .. }
            | Error::Label { .. }
            | Error::EmptyDataset
            | Error::NoEligibleUsers
            | Error::Malformed { .. }
            | Error::Csv(_) => ErrorClass::Data,
            _ => ErrorClass::Runtime,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
