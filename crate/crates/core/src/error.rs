use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: empty file")]
    EmptyFile { path: PathBuf },
    #[error("{path}: malformed csv at row {row}: {message}")]
    MalformedCsv {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("{path}: label column {column} not found")]
    MissingLabelColumn { path: PathBuf, column: String },
    #[error("{path}: more than two classes in label column (found {found:?})")]
    TooManyClasses { path: PathBuf, found: Vec<String> },
    #[error("{path}: label column needs exactly two classes, found {found:?}")]
    TooFewClasses { path: PathBuf, found: Vec<String> },
    #[error("{path}: non-numeric feature cell {value:?} at row {row}, column {column}")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path}: non-finite feature value at row {row}, column {column}")]
    NonFinite {
        path: PathBuf,
        row: usize,
        column: String,
    },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dataset {0:?} contains a single class")]
    SingleClass(String),
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("k = {k} exceeds the number of samples ({n})")]
    TooManyFolds { k: usize, n: usize },
    #[error("stratified split infeasible: class {class} has {count} members, fewer than k = {k}")]
    StratificationInfeasible { class: u8, count: usize, k: usize },
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Gram matrix factorization failed after {attempts} jitter attempts")]
    Factorization { attempts: usize },
    #[error("training partition for fold {fold} contains a single class")]
    SingleClassPartition { fold: usize },
    #[error("{failed} of {total} outer iterations failed; first failure: {first}")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: String,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
