use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A single validation failure located by a dotted field path, e.g.
/// `fabric.chirp_bandwidth_hz`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl FieldError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero range: scatterer coincides with element at {0:?}")]
    ZeroRange([f64; 3]),

    #[error("chirp does not fit subband step: chirp bandwidth {chirp_hz} Hz exceeds step width {step_hz} Hz")]
    ChirpDoesNotFit { chirp_hz: f64, step_hz: f64 },

    #[error("invalid fabric configuration: {0}")]
    InvalidFabric(String),

    #[error("schedule references element outside geometry: chain {chain}, module {module}, step {step}")]
    UnknownModule { chain: usize, module: usize, step: usize },

    #[error("chirp center {chirp_hz} Hz does not match state center {state_hz} Hz")]
    ChirpCenterMismatch { chirp_hz: f64, state_hz: f64 },

    #[error("grid exceeds range support: needs {needed_m:.4} m, profiles cover {support_m:.4} m")]
    GridExceedsRangeSupport { needed_m: f64, support_m: f64 },

    #[error("missing virtual elements: {0:?}")]
    MissingElements(Vec<usize>),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schedule rejected: {0}")]
    Schedule(#[from] crate::scheduler::Violation),

    #[error("configuration invalid:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<FieldError>),

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Validation failures map to exit code 1, everything else to 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Parse { .. }
                | Error::Schedule(_)
                | Error::ChirpDoesNotFit { .. }
                | Error::InvalidFabric(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
