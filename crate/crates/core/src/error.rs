//! Error type shared by every pipeline module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    // ---- tabular ----
    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("CSV file has no data rows")]
    EmptyFile,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` is not numeric")]
    NonNumericColumn(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("line {line}: cannot parse label value `{value}`")]
    BadLabel { line: usize, value: String },
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV failure: {0}")]
    Csv(#[from] csv::Error),

    // ---- preprocess ----
    #[error("column `{0}` has no non-missing values")]
    AllMissing(String),
    #[error("column `{0}` is not categorical")]
    NonCategorical(String),
    #[error("column `{0}` still has missing cells")]
    HasMissing(String),
    #[error("column `{column}` needs at least {needed} non-missing values, has {found}")]
    TooFewValues {
        column: String,
        needed: usize,
        found: usize,
    },
    #[error("invalid fences: lo {lo} > hi {hi}")]
    InvalidFences { lo: f64, hi: f64 },
    #[error("unexpected raw label value {0}")]
    UnexpectedLabelValue(i64),
    #[error("state used before it was fitted")]
    NotFitted,
    #[error("only one class present")]
    SingleClass,

    // ---- numerics ----
    #[error("empty input")]
    Empty,
    #[error("quantile level {0} outside [0, 1]")]
    QOutOfRange(f64),
    #[error("argument outside function domain: {0}")]
    DomainError(String),

    // ---- learners ----
    #[error("empty training input")]
    EmptyInput,
    #[error("k = {k} exceeds the {n} stored training points")]
    KTooLarge { k: usize, n: usize },
    #[error("expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    // ---- selection ----
    #[error("need at least {needed} features, got {found}")]
    TooFewFeatures { needed: usize, found: usize },
    #[error("no feature subset of size {0} was recorded")]
    SizeNotRecorded(usize),

    // ---- stacking / evaluation ----
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("label value {0} is not binary")]
    NonBinary(i64),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("class {class} has {count} members, fewer than k = {k}")]
    ClassSmallerThanK { class: u8, count: usize, k: usize },

    // ---- explain ----
    #[error("all LIME kernel weights vanish")]
    DegenerateKernel,
    #[error("exact Shapley enumeration supports at most {max} features, got {found}")]
    TooManyFeatures { max: usize, found: usize },
    #[error("feature {0} has non-finite or inverted bounds")]
    UnboundedFeature(usize),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            InvalidSchema(_) | InvalidParameter(_) | SizeNotRecorded(_) => ErrorKind::Config,
            Empty | QOutOfRange(_) | DomainError(_) | DegenerateKernel => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }
}
