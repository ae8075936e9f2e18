//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A chord label could not be parsed; carries the offending token.
    #[error("cannot parse chord label {label:?}: {reason}")]
    LabelParse { label: String, reason: String },

    /// A data file is malformed; carries file and line number.
    #[error("{}:{line}: {reason}", file.display())]
    DataFormat {
        file: PathBuf,
        line: usize,
        reason: String,
    },

    /// A caller violated an interface contract (shape mismatch, empty input,
    /// invalid configuration value).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Training produced a non-finite loss or gradient.
    #[error("training diverged at epoch {epoch}, batch {batch}: {reason}")]
    Diverged {
        epoch: usize,
        batch: usize,
        reason: String,
    },

    /// A decode step had no admissible continuation.
    #[error("decode failed at frame {frame}: {reason}")]
    Decode { frame: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
