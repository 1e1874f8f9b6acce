use std::io;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid vocabulary size")]
    InvalidVocabSize,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: nonpositive count")]
    NonpositiveCount { line: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("third moment undefined")]
    ThirdMomentUndefined,
    #[error("effective rank below k")]
    EffectiveRankBelowK,
    #[error("degenerate slice {0}")]
    DegenerateSlice(usize),
    #[error("no separating feature")]
    NoSeparatingFeature,
    #[error("topic column {0} collapsed to zero mass")]
    CollapsedColumn(usize),
    #[error("word {0} outside model support")]
    OutsideSupport(usize),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse classification used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Io,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::EmptyCorpus
            | Error::InvalidVocabSize
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch(_) => ErrorClass::Usage,
            Error::Parse { .. }
            | Error::NonpositiveCount { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorClass::Io,
            Error::ThirdMomentUndefined
            | Error::EffectiveRankBelowK
            | Error::DegenerateSlice(_)
            | Error::NoSeparatingFeature
            | Error::CollapsedColumn(_)
            | Error::OutsideSupport(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
