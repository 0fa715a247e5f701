use thiserror::Error;

#[derive(Debug, Error)]
pub enum UnnError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid pdf: {0}")]
    InvalidPdf(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("exact distance cdf requires a discrete pdf")]
    NotDiscrete,

    #[error("input too large for exhaustive enumeration: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("every class has fewer than k = {k} objects")]
    DeficientClasses { k: usize },

    #[error("unknown class label `{0}`")]
    UnknownLabel(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("gave up after {attempts} attempts: {reason}")]
    GaveUp { attempts: usize, reason: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, UnnError>;
