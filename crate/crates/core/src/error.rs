use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("cannot parse cell at row {row}, column '{column}': {value:?}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("target column '{0}' not found in header")]
    MissingTarget(String),

    #[error("target column is constant")]
    ConstantTarget,

    #[error("column '{0}' has zero variance")]
    ZeroVariance(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("need at least {needed} rows for a fit in dimension {dim}, got {rows}")]
    Underdetermined { rows: usize, dim: usize, needed: usize },

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("non-finite value in input")]
    NonFinite,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("k = {k} exceeds the number of indexed points {n}")]
    TooManyNeighbors { k: usize, n: usize },

    #[error("core group size k = {k} must exceed the dimension d = {d}")]
    CoreTooSmall { k: usize, d: usize },

    #[error("every candidate neighborhood is rank deficient")]
    NoValidNeighborhood,

    #[error("direction is not axis aligned: {0}")]
    NotAxisAligned(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no candidate satisfies the quantile rule q <= 3 sigma")]
    SelectionFailed,
}

pub type Result<T> = std::result::Result<T, Error>;
