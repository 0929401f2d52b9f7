use std::path::PathBuf;

use speech2vec_core::Error as CoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage or configuration, 2 data or parse,
    /// 3 numeric failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) => 1,
            Error::Io { .. } | Error::Parse { .. } => 2,
            Error::Core(e) => match e {
                CoreError::Config(_) => 1,
                CoreError::NonFinite { .. } | CoreError::UndefinedSimilarity | CoreError::UndefinedCorrelation(_) => 3,
                _ => 2,
            },
        }
    }
}
