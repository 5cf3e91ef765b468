use std::path::PathBuf;

use thiserror::Error;

use crate::encodings::EncodingError;
use crate::pruning::PruningError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported format_version {0} (expected 1)")]
    FormatVersion(u64),
    #[error("ground truth required")]
    MissingGroundTruth,
    #[error("dump file {file} truncated: expected {expected} bytes, found {actual}")]
    Truncated { file: String, expected: u64, actual: u64 },
    #[error("manifest lists {manifest} dumps but {found} dump files are present")]
    DumpCountMismatch { manifest: usize, found: usize },
    #[error("invalid dump sequence: {}", .0.join("; "))]
    Invariant(Vec<String>),
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Pruning(#[from] PruningError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    /// Config errors exit with 2, everything else with 3.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
