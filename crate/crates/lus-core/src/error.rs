//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by the pipeline.
///
/// `is_input_error` distinguishes bad inputs (missing files, malformed
/// manifests, unsupported images) from evaluation failures (degenerate folds,
/// singular models); the CLI maps the former to exit code 2 and the latter
/// to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode image {path}: {reason}")]
    ImageDecode { path: PathBuf, reason: String },

    #[error("unsupported image {path}: {reason}")]
    UnsupportedImage { path: PathBuf, reason: String },

    #[error("invalid image geometry: {0}")]
    Geometry(String),

    #[error("invalid region of interest: {0}")]
    InvalidRoi(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("manifest has {0} bad row(s):\n{1}")]
    ManifestRows(usize, String),

    #[error("feature extraction error: {0}")]
    Feature(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("model format error: {0}")]
    ModelFormat(String),
}

impl Error {
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::ImageDecode { .. }
                | Error::UnsupportedImage { .. }
                | Error::Geometry(_)
                | Error::InvalidRoi(_)
                | Error::Manifest(_)
                | Error::ManifestRows(..)
                | Error::ModelFormat(_)
        )
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
