//! Differentiable operations. Each is a method on [`Tensor`](crate::Tensor).

mod elementwise;
pub(crate) mod linalg;
mod nn;
mod reduce;
