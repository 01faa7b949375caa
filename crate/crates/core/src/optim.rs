use crate::autograd::Gradients;
use crate::error::{Result, TensorError};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.98,
            epsilon: 1e-9,
        }
    }
}

/// Adam moments for a fixed, ordered list of parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    shapes: Vec<Vec<usize>>,
}

impl AdamState {
    pub fn new(params: &[Tensor], config: AdamConfig) -> Self {
        AdamState {
            config,
            step: 0,
            first_moment: params.iter().map(|p| vec![0.0; p.numel()]).collect(),
            second_moment: params.iter().map(|p| vec![0.0; p.numel()]).collect(),
            shapes: params.iter().map(|p| p.shape().to_vec()).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self, index: usize) -> &[f64] {
        &self.first_moment[index]
    }

    pub fn second_moment(&self, index: usize) -> &[f64] {
        &self.second_moment[index]
    }

    /// One bias-corrected Adam update of `params` in place. Nothing is
    /// modified unless every parameter has a gradient of matching shape.
    pub fn step(&mut self, params: &[Tensor], grads: &Gradients, lr: f64) -> Result<()> {
        let mut resolved = Vec::with_capacity(params.len());
        for (index, p) in params.iter().enumerate() {
            let state_shape = self.shapes.get(index).cloned().unwrap_or_default();
            if params.len() != self.shapes.len() || state_shape != p.shape() {
                return Err(TensorError::StateMismatch {
                    index,
                    state: state_shape,
                    param: p.shape().to_vec(),
                });
            }
            let g = grads.get(p).ok_or_else(|| TensorError::MissingGradient {
                index,
                shape: p.shape().to_vec(),
            })?;
            resolved.push(g);
        }

        self.step += 1;
        let AdamConfig { beta1, beta2, epsilon } = self.config;
        let t = self.step as i32;
        let bias1 = 1.0 - beta1.powi(t);
        let bias2 = 1.0 - beta2.powi(t);
        for (((p, g), m), v) in params
            .iter()
            .zip(resolved)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            let mut data = p.data_mut();
            for i in 0..data.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                data[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}
