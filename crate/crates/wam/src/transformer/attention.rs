use wam_core::Tensor;

use super::params::AttentionParams;
use crate::corpus::PAD;
use crate::error::Result;

/// Additive score for masked positions; `exp` of it underflows to exactly 0.
pub const MASK_VALUE: f64 = -1e9;

pub struct AttentionOutput {
    pub output: Tensor,
    /// Softmax weights, `[.., len_q, len_k]`.
    pub weights: Tensor,
}

/// `softmax(Q Kᵀ / √d_k + mask) V` over the last two axes.
pub fn attention(q: &Tensor, k: &Tensor, v: &Tensor, mask: Option<&Tensor>) -> Result<AttentionOutput> {
    let d_k = *q.shape().last().unwrap_or(&1) as f64;
    let mut scores = q.matmul(&k.transpose()?)?.scale(1.0 / d_k.sqrt());
    if let Some(m) = mask {
        scores = scores.add(m)?;
    }
    let weights = scores.softmax()?;
    let output = weights.matmul(v)?;
    Ok(AttentionOutput { output, weights })
}

/// Additive mask of shape `[batch, heads, len_q, len_k]` hiding `PAD` keys and,
/// when `causal`, keys after the query position.
pub fn build_mask(keys: &[u32], batch: usize, heads: usize, len_q: usize, causal: bool) -> Tensor {
    let len_k = keys.len() / batch.max(1);
    let mut data = Vec::with_capacity(batch * heads * len_q * len_k);
    for b in 0..batch {
        let row = &keys[b * len_k..(b + 1) * len_k];
        for _ in 0..heads {
            for i in 0..len_q {
                data.extend(row.iter().enumerate().map(|(j, &id)| {
                    if id == PAD || (causal && j > i) {
                        MASK_VALUE
                    } else {
                        0.0
                    }
                }));
            }
        }
    }
    Tensor::new(&[batch, heads, len_q, len_k], data).expect("mask shape")
}

fn split_heads(x: &Tensor, heads: usize) -> Result<Tensor> {
    let s = x.shape();
    let (b, len, d) = (s[0], s[1], s[2]);
    Ok(x.reshape(&[b, len, heads, d / heads])?.permute(&[0, 2, 1, 3])?)
}

/// Learned projections into `heads` parallel attentions whose outputs are
/// concatenated and projected back to `d_model`. Inputs are `[batch, len,
/// d_model]`.
pub fn multi_head_attention(
    x_q: &Tensor,
    x_kv: &Tensor,
    params: &AttentionParams,
    heads: usize,
    mask: Option<&Tensor>,
) -> Result<AttentionOutput> {
    let q = split_heads(&x_q.matmul(&params.w_q)?, heads)?;
    let k = split_heads(&x_kv.matmul(&params.w_k)?, heads)?;
    let v = split_heads(&x_kv.matmul(&params.w_v)?, heads)?;
    let AttentionOutput { output, weights } = attention(&q, &k, &v, mask)?;
    let (b, len_q, d) = (x_q.shape()[0], x_q.shape()[1], x_q.shape()[2]);
    let merged = output.permute(&[0, 2, 1, 3])?.reshape(&[b, len_q, d])?;
    Ok(AttentionOutput {
        output: params.output.forward(&merged)?,
        weights,
    })
}
