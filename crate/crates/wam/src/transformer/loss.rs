use wam_core::Tensor;

use crate::corpus::PAD;
use crate::error::{Result, WamError};

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(WamError::InvalidArgument(format!(
            "label smoothing must lie in [0, 1), got {epsilon}"
        )))
    }
}

/// Target distribution for one position: `1 - ε` on the true token and
/// `ε / (V - 2)` on every token other than the true one and `PAD`.
pub fn smoothed_distribution(vocab: usize, true_id: u32, epsilon: f64) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    let t = true_id as usize;
    if t >= vocab || true_id == PAD {
        return Err(WamError::InvalidArgument(format!(
            "target id {true_id} is PAD or outside a vocabulary of {vocab}"
        )));
    }
    if epsilon > 0.0 && vocab < 3 {
        return Err(WamError::InvalidArgument(
            "label smoothing needs at least 3 target tokens".into(),
        ));
    }
    let off = if epsilon > 0.0 { epsilon / (vocab - 2) as f64 } else { 0.0 };
    let mut q = vec![off; vocab];
    q[PAD as usize] = 0.0;
    q[t] = 1.0 - epsilon;
    Ok(q)
}

/// `KL(smoothed ‖ softmax(logits))` averaged over the positions whose target
/// is not `PAD`. `logits` has the target vocabulary as its last axis and one
/// row per entry of `targets`.
pub fn label_smoothed_loss(logits: &Tensor, targets: &[u32], epsilon: f64) -> Result<Tensor> {
    check_epsilon(epsilon)?;
    let vocab = *logits.shape().last().unwrap_or(&0);
    if vocab == 0 || logits.numel() != targets.len() * vocab {
        return Err(WamError::InvalidArgument(format!(
            "logits of shape {:?} do not match {} targets",
            logits.shape(),
            targets.len()
        )));
    }
    let mut q = vec![0.0; logits.numel()];
    let mut entropy = 0.0;
    let mut positions = 0usize;
    for (row, &t) in q.chunks_mut(vocab).zip(targets) {
        if t == PAD {
            continue;
        }
        let dist = smoothed_distribution(vocab, t, epsilon)?;
        entropy += dist.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
        row.copy_from_slice(&dist);
        positions += 1;
    }
    if positions == 0 {
        return Err(WamError::InvalidArgument("no non-PAD target positions".into()));
    }
    let q = Tensor::new(logits.shape(), q)?;
    let cross = logits.log_softmax()?.mul(&q)?.sum();
    Ok(cross.scale(-1.0).add_scalar(entropy).scale(1.0 / positions as f64))
}
