use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A column with (numerically) zero norm where a normalized column is needed.
    #[error("column {index} has zero norm")]
    ZeroColumn { index: usize },

    #[error("empty selection: the measurement matrix is zero")]
    EmptySelection,

    #[error("rank-deficient least-squares system: numerical rank {rank} of {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("invalid config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
