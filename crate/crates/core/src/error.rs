use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{kind} not found: {id}")]
    NotFound { kind: &'static str, id: String },

    #[error("level generation failed for zone {zone} act {act} (layout seed {seed}) after {attempts} attempts")]
    GenerationFailed {
        zone: u32,
        act: u32,
        seed: u64,
        attempts: u32,
    },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported {what} version {found} (expected {expected})")]
    UnsupportedVersion {
        what: &'static str,
        found: u16,
        expected: u16,
    },

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("replay buffer not ready: {have} transitions, need {need}")]
    NotReady { have: usize, need: usize },

    #[error("incomplete result matrix: missing level {level} seed {seed}")]
    IncompleteMatrix { level: String, seed: u64 },

    #[error("shape mismatch: expected {expected}, got {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("worker group aborted: {0}")]
    Aborted(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
