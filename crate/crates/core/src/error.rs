use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Structural problem with an input file (ragged rows, bad PGM header, ...).
    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    /// Non-numeric cell; `row` and `column` are 0-based.
    #[error("parse error in {path} at row {row}, column {column}: cannot parse {token:?}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        token: String,
    },

    #[error("dimension mismatch: expected {expected}, got {found}{}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Dimension {
        expected: usize,
        found: usize,
        context: Option<String>,
    },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Violated numeric precondition (non-symmetric input, zero vector, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("eigenspectrum too short: rank {rank} < 3")]
    SpectrumTooShort { rank: usize },

    #[error("degenerate eigenspectrum model: lambda_1 == lambda_m ({0})")]
    FlatSpectrum(f64),

    #[error("pivot m = {0} falls on a zero eigenvalue")]
    PivotAtNull(usize),

    #[error("training failed: {0}")]
    Training(String),

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("unsupported model version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
