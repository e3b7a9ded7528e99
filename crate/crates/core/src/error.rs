use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("codebook capacity exceeded: {requested} words requested but only {capacity} distinct words exist")]
    Capacity { requested: usize, capacity: u128 },

    #[error("codebook generation stalled: {found} distinct words after {attempts} attempts ({requested} requested)")]
    Convergence {
        requested: usize,
        found: usize,
        attempts: usize,
    },

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("degenerate channel estimate: beamformer undefined for a zero vector")]
    DegenerateEstimate,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed CSV: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 3 for numeric/convergence failures,
    /// 1 for I/O, 2 for everything that traces back to bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. } | Error::DegenerateEstimate => 3,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}
