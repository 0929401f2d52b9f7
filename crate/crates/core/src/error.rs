use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Shapes or hyperparameters that do not fit together.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("dimension mismatch in {tensor}: expected {expected}, got {actual}")]
    Dimension {
        tensor: String,
        expected: usize,
        actual: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Alignment or corpus data violating its invariants.
    #[error("validation error: {0}")]
    Validation(String),
    #[error("non-finite value in {tensor}")]
    NonFinite { tensor: String },
    #[error("backward called without a recorded forward pass")]
    NoForwardPass,
    #[error("cosine similarity undefined for a zero-norm vector")]
    UndefinedSimilarity,
    #[error("rank correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("only {used} usable pairs ({skipped} skipped); at least 2 are needed")]
    InsufficientCoverage { used: usize, skipped: usize },
    #[error("unknown word {0:?}")]
    UnknownWord(String),
}

impl Error {
    pub(crate) fn dim(tensor: &str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            tensor: tensor.into(),
            expected,
            actual,
        }
    }
}
