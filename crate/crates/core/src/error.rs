use thiserror::Error;

use crate::tensor::OpKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("shape mismatch in {op}: {shapes:?}")]
    ShapeMismatch { op: OpKind, shapes: Vec<Vec<usize>> },

    #[error("{op}: index {index} out of range for {len} rows")]
    IndexOutOfRange { op: OpKind, index: usize, len: usize },

    #[error("{op}: {reason}")]
    InvalidArgument { op: OpKind, reason: String },

    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),

    #[error("no gradient for registered parameter #{index} (shape {shape:?})")]
    MissingGradient { index: usize, shape: Vec<usize> },

    #[error("optimizer state does not match parameter #{index}: state {state:?}, param {param:?}")]
    StateMismatch {
        index: usize,
        state: Vec<usize>,
        param: Vec<usize>,
    },

    #[error("learning-rate schedule is defined for step >= 1, got {0}")]
    InvalidStep(u64),
}

pub type Result<T, E = TensorError> = std::result::Result<T, E>;
