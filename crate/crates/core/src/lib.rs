//! Numeric substrate: dense `f64` tensors with define-by-run reverse-mode
//! differentiation, the Adam optimizer and a warmup/inverse-sqrt learning-rate
//! schedule.
//!
//! ```
//! use wam_core::{backward, Tensor};
//!
//! let x = Tensor::param(&[3], vec![1.0, 2.0, 3.0]).unwrap();
//! let loss = x.mul(&x).unwrap().sum();
//! let grads = backward(&loss).unwrap();
//! assert_eq!(grads.get(&x).unwrap(), &[2.0, 4.0, 6.0]);
//! ```

mod autograd;
mod error;
pub mod gradcheck;
pub mod init;
mod ops;
mod optim;
mod schedule;
mod tensor;

pub use autograd::{backward, Gradients};
pub use error::{Result, TensorError};
pub use optim::{AdamConfig, AdamState};
pub use schedule::LrSchedule;
pub use tensor::{grad_enabled, no_grad, BackwardArgs, BackwardFn, NoGradGuard, OpKind, Tensor};
