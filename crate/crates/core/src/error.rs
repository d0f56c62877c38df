use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed binary or text input. `offset` is a byte offset (binary) or
    /// a 1-based line number (text), when one is meaningful.
    #[error("format error{}: {msg}", offset.map(|o| format!(" at {o}")).unwrap_or_default())]
    Format { offset: Option<u64>, msg: String },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("no consensus: best hypothesis had {best} inliers, {required} required")]
    NoConsensus { best: usize, required: usize },

    #[error("config error (line {line}): {msg}")]
    Config { line: usize, msg: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("image: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn format(offset: impl Into<Option<u64>>, msg: impl Into<String>) -> Self {
        Error::Format {
            offset: offset.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
