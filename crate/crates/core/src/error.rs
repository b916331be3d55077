use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column {column:?}: value is not finite")]
    NonFiniteValue { row: usize, column: String },

    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("dataset needs at least 2 rows, found {0}")]
    TooFewRows(usize),

    #[error("dataset needs at least one feature column")]
    NoFeatures,

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown feature {0:?}")]
    UnknownFeature(String),

    #[error("invalid scale range ({low}, {high}): low must be below high and both finite")]
    InvalidScaleRange { low: f64, high: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("index ({i}, {j}) out of bounds for {n} points")]
    IndexOutOfBounds { i: usize, j: usize, n: usize },

    #[error("symmetric eigensolver did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("probability {0} outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("invalid constraint policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite coordinate at iteration {iteration}, point {point}")]
    NonFiniteCoordinate { iteration: usize, point: usize },

    #[error("all original distances are zero; stress is undefined")]
    DegenerateDistances,

    #[error("labels are required but the dataset has none")]
    MissingLabels,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid distance matrix file: {0}")]
    InvalidMatrixFile(String),

    #[error("invalid bench grid: {0}")]
    Grid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
