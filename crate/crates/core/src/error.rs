use alloc::string::String;
use core::fmt;

/// Errors raised by the model, its data structures and the evaluation harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed or invariant-violating input data.
    DataFormat(String),
    /// Operand shapes do not agree.
    Dimension(String),
    /// An invalid hyperparameter or protocol setting.
    Config(String),
    /// Not enough unobserved cells to draw the requested negatives.
    Sampling(String),
    /// A metric is undefined for the given input (e.g. single-class labels).
    Metric(String),
    /// A drug, disease or memory row index is out of range.
    Index(String),
    /// The finite-difference checker saw a nondeterministic loss.
    Check(String),
    /// Training diverged.
    Training { epoch: usize, fold: Option<usize>, message: String },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DataFormat(m) => write!(f, "data format error: {m}"),
            Error::Dimension(m) => write!(f, "dimension error: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Sampling(m) => write!(f, "sampling error: {m}"),
            Error::Metric(m) => write!(f, "metric error: {m}"),
            Error::Index(m) => write!(f, "index error: {m}"),
            Error::Check(m) => write!(f, "gradient check error: {m}"),
            Error::Training { epoch, fold: Some(k), message } => {
                write!(f, "training error in fold {k} at epoch {epoch}: {message}")
            }
            Error::Training { epoch, fold: None, message } => {
                write!(f, "training error at epoch {epoch}: {message}")
            }
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// Attaches a fold index to a training error; other errors pass through.
    pub fn in_fold(self, fold: usize) -> Self {
        match self {
            Error::Training { epoch, message, .. } => Error::Training { epoch, fold: Some(fold), message },
            other => other,
        }
    }
}
