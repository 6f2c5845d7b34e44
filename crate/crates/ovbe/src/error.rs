use std::path::PathBuf;

use crate::ingest::RowError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const DEGENERATE: i32 = 2;
    pub const USAGE: i32 = 64;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("{path}: {} malformed row(s); first: line {}: {}", rows.len(), rows[0].line, rows[0].reason)]
    Rows { path: PathBuf, rows: Vec<RowError> },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}: no data rows")]
    EmptyFile(PathBuf),
    #[error("unknown choice label `{0}`")]
    UnknownLabel(String),
    #[error("dataset failed validation: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] vbe_core::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => exit::USAGE,
            Error::Core(vbe_core::Error::Degenerate(_)) => exit::DEGENERATE,
            _ => exit::VALIDATION,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
