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
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("no data rows")]
    NoDataRows,
    #[error("no complete cases")]
    NoCompleteCases,
    #[error("class column {0} absent")]
    ClassColumnAbsent(String),
    #[error("ragged row at line {line}: expected {expected} cells, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("non-numeric cell {value:?} at line {line}, column {column:?}")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },
    #[error("missing class label at line {0}")]
    MissingLabel(u64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("divergence at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("divergence: non-finite gradient")]
    NonFiniteGradient,
    #[error("no masked cells")]
    NoMaskedCells,
    #[error("single-class training data")]
    SingleClass,
    #[error("empty test set")]
    EmptyTestSet,
    #[error("model file format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by numeric blow-up during training.
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::NonFiniteGradient)
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
