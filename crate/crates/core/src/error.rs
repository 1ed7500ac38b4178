use std::path::PathBuf;

use crate::container::ContainerError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("average precision is undefined: no positive cells in the evaluated region")]
    UndefinedAp,

    #[error("chirp slice {0} is all zeros")]
    EmptyChirp(usize),

    #[error("scatterer {index} sits on the radar origin (range 0)")]
    ZeroRange { index: usize },

    #[error("split needs at least 2 sequences, found {0}")]
    TooFewSequences(usize),

    #[error("prediction/frame id mismatch: missing predictions for {missing:?}, unexpected predictions for {extra:?}")]
    IdMismatch { missing: Vec<u64>, extra: Vec<u64> },

    #[error("{path}: {source}")]
    Container {
        path: PathBuf,
        #[source]
        source: ContainerError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
