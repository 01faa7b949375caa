//! Central finite-difference checks of reverse-mode gradients.
//!
//! The numeric side only ever evaluates the forward function, so it is
//! independent of every backward closure it checks.

use crate::autograd::backward;
use crate::error::Result;
use crate::tensor::{no_grad, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct GradEntry {
    pub input: usize,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

impl GradEntry {
    /// Relative error, or zero when the absolute error is within `atol`.
    pub fn error(&self, atol: f64) -> f64 {
        let diff = (self.analytic - self.numeric).abs();
        if diff <= atol {
            0.0
        } else {
            diff / self.analytic.abs().max(self.numeric.abs())
        }
    }
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub entries: Vec<GradEntry>,
}

impl GradCheckReport {
    pub fn worst(&self, atol: f64) -> Option<&GradEntry> {
        self.entries
            .iter()
            .max_by(|a, b| a.error(atol).total_cmp(&b.error(atol)))
    }

    pub fn max_error(&self, atol: f64) -> f64 {
        self.worst(atol).map_or(0.0, |e| e.error(atol))
    }

    pub fn passes(&self, rtol: f64, atol: f64) -> bool {
        self.max_error(atol) <= rtol
    }
}

/// Compares the backward-pass gradient of the scalar `f(inputs)` against
/// central differences with step `h`, for every element of every input.
pub fn check_gradients<F>(inputs: &[Tensor], f: F, h: f64) -> Result<GradCheckReport>
where
    F: Fn(&[Tensor]) -> Result<Tensor>,
{
    let loss = f(inputs)?;
    let grads = backward(&loss)?;
    drop(loss);

    let mut entries = Vec::new();
    for (input, t) in inputs.iter().enumerate() {
        let analytic = grads.get(t).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; t.numel()]);
        for (index, &a) in analytic.iter().enumerate() {
            let original = t.data()[index];
            t.data_mut()[index] = original + h;
            let plus = no_grad(|| f(inputs))?.item();
            t.data_mut()[index] = original - h;
            let minus = no_grad(|| f(inputs))?.item();
            t.data_mut()[index] = original;
            entries.push(GradEntry {
                input,
                index,
                analytic: a,
                numeric: (plus - minus) / (2.0 * h),
            });
        }
    }
    Ok(GradCheckReport { entries })
}
