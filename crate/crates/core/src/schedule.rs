use crate::error::{Result, TensorError};

/// Linear warmup followed by inverse-square-root decay:
/// `d_model^-0.5 * min(step^-0.5, step * warmup^-1.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub d_model: usize,
    pub warmup_steps: u64,
}

impl LrSchedule {
    pub fn new(d_model: usize, warmup_steps: u64) -> Self {
        assert!(warmup_steps > 0, "warmup_steps must be positive");
        assert!(d_model > 0, "d_model must be positive");
        LrSchedule { d_model, warmup_steps }
    }

    pub fn lr_at(&self, step: u64) -> Result<f64> {
        if step == 0 {
            return Err(TensorError::InvalidStep(step));
        }
        let s = step as f64;
        let decay = s.powf(-0.5);
        let warmup = s * (self.warmup_steps as f64).powf(-1.5);
        Ok((self.d_model as f64).powf(-0.5) * decay.min(warmup))
    }
}
