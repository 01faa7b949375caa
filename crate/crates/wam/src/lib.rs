//! Cross-lingual word-embedding alignment: a translation transformer whose
//! two embedding tables are pulled together by a per-sentence multi-scale
//! MMD loss, with the corpus tooling, baselines and evaluation around it.
//!
//! ```
//! use wam::align::{multiscale_rbf, KernelConfig};
//!
//! let k = multiscale_rbf(&[0.5, 1.0], &[0.5, 1.0], &KernelConfig::default()).unwrap();
//! assert_eq!(k, 6.0);
//! ```

pub mod align;
pub mod checkpoint;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod registry;
pub mod seed;
pub mod transformer;

pub use error::{Result, WamError};
