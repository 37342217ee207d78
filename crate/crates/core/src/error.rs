use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("outlier index set is empty")]
    EmptyOutlierSet,

    #[error("degenerate normalization: sample coincides with the reference vector")]
    DegenerateNormalization,

    #[error("invalid threshold result: {0}")]
    InvalidThresholdResult(String),

    #[error("insufficient points: need at least {needed}, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("detector `{detector}` failed: {message}")]
    Detector { detector: String, message: String },

    #[error("detector `{0}` used before fit")]
    NotFitted(String),

    #[error("parse error in {path} at byte offset {offset}: {message}")]
    ParseAtOffset { path: PathBuf, offset: u64, message: String },

    #[error("parse error in {path} at row {row}: {message}")]
    ParseAtRow { path: PathBuf, row: usize, message: String },

    #[error("outlier pool too small: need {needed} samples, have {available} (max achievable gamma {max_gamma:.4})")]
    InsufficientOutlierPool { needed: usize, available: usize, max_gamma: f64 },

    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("serialization error on {path}: {message}")]
    Serialization { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
