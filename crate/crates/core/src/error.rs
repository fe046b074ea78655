use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: parse error: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate id `{0}` in manifest")]
    DuplicateId(String),

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("duplicate word `{word}` in vocabulary (line {line})")]
    DuplicateWord { word: String, line: usize },

    #[error("{}: bad magic {found:?}, expected {expected:?}", path.display())]
    BadMagic {
        path: PathBuf,
        found: Vec<u8>,
        expected: &'static [u8],
    },

    #[error("{}: declared dim {declared} needs {expected_len} bytes, file has {actual_len}{}", path.display(), if actual_len < expected_len { " (truncated payload)" } else { "" })]
    LengthMismatch {
        path: PathBuf,
        declared: usize,
        expected_len: usize,
        actual_len: usize,
    },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("sample `{id}`: {source}")]
    Sample {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient pool for {category}: requested {requested}, available {available} (short by {})", requested - available)]
    InsufficientPool {
        category: String,
        requested: usize,
        available: usize,
    },

    #[error("too few samples: {samples} samples cannot be split into {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },

    #[error("non-finite loss at epoch {epoch} (learning rate {learning_rate}); try a smaller learning rate")]
    Diverged { epoch: usize, learning_rate: f64 },

    #[error("duplicate keyword `{keyword}` in category `{category}`")]
    DuplicateKeyword { category: String, keyword: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn for_sample(self, id: &str) -> Self {
        Error::Sample {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
