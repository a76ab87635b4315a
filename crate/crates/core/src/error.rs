use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building, validating or clustering dissimilarity data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),

    #[error("condensed matrix for n={n} needs {expected} values, got {got}")]
    CondensedLength {
        n: usize,
        expected: usize,
        got: usize,
    },

    #[error("invalid dissimilarity {value} between observations {i} and {j}")]
    InvalidValue { i: usize, j: usize, value: f64 },

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },

    #[error("matrix is not symmetric: d[{i},{j}] = {upper} but d[{j},{i}] = {lower}")]
    Asymmetric {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
    },

    #[error("diagonal entry d[{0},{0}] is not zero")]
    NonZeroDiagonal(usize),

    #[error("adjacency is not symmetric: {i} lists {j} but {j} does not list {i}")]
    AsymmetricAdjacency { i: String, j: String },

    #[error("coordinate out of range for observation {row}: lat={lat}, lon={lon}")]
    CoordinateOutOfRange { row: usize, lat: f64, lon: f64 },

    #[error("weight {value} of observation {index} is not a positive finite number")]
    InvalidWeight { index: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("member set must not be empty")]
    EmptySet,

    #[error("cluster sets overlap on observation {0}")]
    OverlappingSets(usize),

    #[error("observation index {index} out of range for n={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("non-finite aggregation value encountered at merge step {step}")]
    NonFiniteDelta { step: usize },

    #[error("number of clusters {k} out of range 1..={n}")]
    ClusterCountOutOfRange { k: usize, n: usize },

    #[error("invalid dendrogram: {0}")]
    InvalidDendrogram(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid alpha grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for I/O failures, as opposed to problems with the content of the input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
