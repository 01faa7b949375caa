use std::path::PathBuf;

use thiserror::Error;
use wam_core::TensorError;

#[derive(Debug, Error)]
pub enum WamError {
    #[error(transparent)]
    Tensor(#[from] TensorError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("unknown {kind} '{name}' (available: {})", .available.join(", "))]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("no dictionary pair has both words in the vocabularies")]
    NoCoverage,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite loss at step {step} (L={loss}, L_T={translation}, L_M={mmd:?}, landmark={landmark:?})")]
    NonFiniteLoss {
        step: u64,
        loss: f64,
        translation: f64,
        mmd: Option<f64>,
        landmark: Option<f64>,
        /// Per-parameter (name, max |value|, all finite) at the failing step.
        parameters: Vec<(String, f64, bool)>,
    },
}

impl WamError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        WamError::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by bad user input rather than by a failing run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            WamError::Config(_) | WamError::UnknownStrategy { .. } | WamError::InvalidArgument(_)
        )
    }
}

pub type Result<T, E = WamError> = std::result::Result<T, E>;
