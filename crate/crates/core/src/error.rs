use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precision budget exhausted at {bits} bits while {what}")]
    PrecisionExhausted { what: String, bits: u32 },

    #[error("interval {0} contains zero")]
    ContainsZero(String),

    #[error("logarithm of an interval that is not strictly positive: {0}")]
    NotPositive(String),

    #[error("continued fraction of {label} has only {have} certified terms, {need} needed")]
    ExpansionExhausted { label: String, have: usize, need: usize },

    #[error("mathematical mismatch: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
