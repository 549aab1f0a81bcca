use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the sensing chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("direction is undefined for the zero vector")]
    DegenerateDirection,

    #[error("path delay {delay_s:.3e} s exceeds the unambiguous delay {limit_s:.3e} s")]
    DelayAliased { delay_s: f64, limit_s: f64 },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeError {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("phase is indeterminate on antenna {antenna} (zero correlation sum)")]
    IndeterminatePhase { antenna: usize },

    #[error("invalid configuration: {0}")]
    ConfigError(String),

    #[error("processing window is incomplete: {0}")]
    WindowIncomplete(String),

    #[error("bistatic geometry is degenerate (denominator {denominator:.3e})")]
    DegenerateGeometry { denominator: f64 },

    #[error("measurement has no physical solution (r' = {range:.3e} m)")]
    NoPhysicalSolution { range: f64 },

    #[error("timestamp {timestamp} is not after the previous update {previous}")]
    OutOfOrder { timestamp: f64, previous: f64 },

    #[error("not a capture file (magic {0:?})")]
    NotACapture([u8; 4]),

    #[error("capture is corrupt: {reason}")]
    Corrupt {
        reason: String,
        packet: Option<u32>,
    },

    #[error("unsupported capture version {0}")]
    Unsupported(u16),

    #[error("no overlapping timestamps between tracks and ground truth")]
    NoOverlap,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::ConfigError(msg.into())
    }

    /// Process exit code used by the command-line tool: 2 for bad input,
    /// 3 for failures inside the processing chain.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigError(_)
            | Error::NotACapture(_)
            | Error::Corrupt { .. }
            | Error::Unsupported(_)
            | Error::Io { .. }
            | Error::Parse { .. }
            | Error::ShapeError { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
