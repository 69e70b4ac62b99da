//! Error type shared across the pipeline.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("png decode error on {path}: {message}")]
    PngDecode { path: PathBuf, message: String },

    #[error("unsupported image format on {path}: {message}")]
    UnsupportedImage { path: PathBuf, message: String },

    #[error("manifest error at line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("point ({x}, {y}) outside image bounds {width}x{height}")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no lesion found: {0}")]
    NoLesion(String),

    #[error("feature matrix error: {0}")]
    FeatureMatrix(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("reducer state error: {0}")]
    ReducerState(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
