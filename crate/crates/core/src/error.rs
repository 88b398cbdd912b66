use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid feature set: {0}")]
    InvalidFeatures(String),

    #[error("center set is empty")]
    EmptyCenters,

    #[error("initial pool is empty; greedy selection needs at least one seed point")]
    EmptySeed,

    #[error("budget {budget} exceeds the {available} available points")]
    BudgetExceedsPool { budget: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("labels are required but missing")]
    MissingLabels,

    #[error("labeled set is empty")]
    EmptyLabeledSet,

    #[error("strategy `{strategy}` requires {input}")]
    MissingStrategyInput {
        strategy: &'static str,
        input: &'static str,
    },

    #[error("probability vector is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("not a dataset file: expected magic `CSAL`, found {found:?}")]
    BadMagic { found: Vec<u8> },

    #[error("unsupported dataset format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated dataset: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Short stable identifier used in machine-parseable CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidFeatures(_) => "invalid_features",
            Error::EmptyCenters => "empty_centers",
            Error::EmptySeed => "empty_seed",
            Error::BudgetExceedsPool { .. } => "budget_exceeds_pool",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::MissingLabels => "missing_labels",
            Error::EmptyLabeledSet => "empty_labeled_set",
            Error::MissingStrategyInput { .. } => "missing_strategy_input",
            Error::NotNormalized { .. } => "not_normalized",
            Error::BadMagic { .. } => "bad_magic",
            Error::UnsupportedVersion(_) => "unsupported_version",
            Error::Truncated { .. } => "truncated",
            Error::Format(_) => "format",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }
}
