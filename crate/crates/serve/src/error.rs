use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = ServeError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Core(#[from] retrobench::Error),

    #[error("invalid session config: {0}")]
    Config(String),

    #[error("invalid session config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ServeError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ServeError::Io {
            path: path.into(),
            source,
        }
    }
}
