use std::path::PathBuf;

/// Errors produced anywhere in the stacking pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: unknown nominal value {token:?} for attribute {attribute:?}")]
    UnknownNominal {
        line: usize,
        attribute: String,
        token: String,
    },

    #[error("line {line}: expected {expected} cells, found {found}")]
    WidthMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("class {0:?} has no training instances")]
    EmptyClass(String),

    #[error("shape mismatch for {what}: got {got}, expected {expected}")]
    Shape {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("learner {learner} failed on fold {fold}: {source}")]
    Learner {
        learner: usize,
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Wraps the error with a human-readable context label.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
