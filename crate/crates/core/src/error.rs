use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing required column {0:?}")]
    MissingColumn(String),

    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },

    #[error("no label for admission {0:?}")]
    MissingLabel(String),

    #[error("rule file {file:?} line {line}: {message}")]
    BadRule {
        file: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("need at least {needed} items, got {got}")]
    TooFewItems { needed: usize, got: usize },

    #[error("vector dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("labels contain a single class; need both positive and negative")]
    SingleClass,

    #[error("prediction and label lengths differ ({predictions} vs {labels})")]
    LengthMismatch { predictions: usize, labels: usize },

    #[error("gini is undefined when both weight totals are zero")]
    EmptyGini,

    #[error("vocabulary fingerprint mismatch: model {model:#x}, data {data:#x}")]
    VocabularyMismatch { model: u64, data: u64 },

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
