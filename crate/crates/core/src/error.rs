use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid temporal profile: {0}")]
    InvalidProfile(String),

    #[error("sensor temporal response cannot be a Dirac delta")]
    SensorDelta,

    #[error("degenerate path: zero-length segment {0}")]
    DegeneratePath(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parameter '{name}': {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("histogram file: {0}")]
    HistogramFormat(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
