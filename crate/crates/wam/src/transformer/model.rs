use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wam_core::{no_grad, Tensor};

use super::attention::{build_mask, multi_head_attention};
use super::loss::label_smoothed_loss;
use super::params::{EmbeddingTable, LayerNormParams, ModelParams};
use super::positional::positional_encoding;
use super::TransformerConfig;
use crate::corpus::{Batch, Side, BOS, EOS};
use crate::error::{Result, WamError};

const LAYER_NORM_EPS: f64 = 1e-6;

/// Inverted dropout with its own seeded stream. `Dropout::off()` is the
/// identity and is used for evaluation.
pub struct Dropout {
    rate: f64,
    rng: Option<ChaCha8Rng>,
}

impl Dropout {
    pub fn off() -> Self {
        Dropout { rate: 0.0, rng: None }
    }

    pub fn train(rate: f64, seed: u64) -> Self {
        Dropout {
            rate,
            rng: Some(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    pub fn apply(&mut self, x: &Tensor) -> Result<Tensor> {
        let rate = self.rate;
        match &mut self.rng {
            Some(rng) if rate > 0.0 => {
                let keep = 1.0 / (1.0 - rate);
                let mask: Vec<f64> = (0..x.numel())
                    .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
                    .collect();
                Ok(x.mul(&Tensor::new(x.shape(), mask)?)?)
            }
            _ => Ok(x.clone()),
        }
    }
}

/// Encoder-decoder translation model (post-layer-norm residual sublayers).
#[derive(Debug, Clone)]
pub struct Transformer {
    pub config: TransformerConfig,
    pub params: ModelParams,
}

fn residual_norm(x: &Tensor, sub: &Tensor, norm: &LayerNormParams) -> Result<Tensor> {
    Ok(x.add(sub)?.layer_norm(&norm.gain, &norm.bias, LAYER_NORM_EPS)?)
}

impl Transformer {
    pub fn new(config: TransformerConfig, source_vocab: usize, target_vocab: usize, seed: u64) -> Result<Self> {
        let errors = config.validate();
        if !errors.is_empty() {
            return Err(WamError::Config(errors));
        }
        let params = ModelParams::init(&config, source_vocab, target_vocab, &mut ChaCha8Rng::seed_from_u64(seed));
        Ok(Transformer { config, params })
    }

    pub fn table(&self, side: Side) -> &EmbeddingTable {
        match side {
            Side::Source => &self.params.source_embedding,
            Side::Target => &self.params.target_embedding,
        }
    }

    pub fn target_vocab(&self) -> usize {
        self.params.target_embedding.rows()
    }

    /// Raw embedding rows `[ids.len(), d_model]`, as used by the alignment
    /// losses.
    pub fn lookup(&self, ids: &[u32], side: Side) -> Result<Tensor> {
        let ids: Vec<usize> = ids.iter().map(|&i| i as usize).collect();
        Ok(self.table(side).weight.gather_rows(&ids)?)
    }

    /// Embeddings scaled by `√d_model`, shaped `[batch, len, d_model]` for a
    /// row-major id matrix.
    pub fn embed(&self, ids: &[u32], batch: usize, side: Side) -> Result<Tensor> {
        let d = self.config.d_model;
        let len = ids.len().checked_div(batch).unwrap_or(0);
        let rows = self.lookup(ids, side)?.scale((d as f64).sqrt());
        Ok(rows.reshape(&[batch, len, d])?)
    }

    fn embed_with_positions(&self, ids: &[u32], batch: usize, side: Side, dropout: &mut Dropout) -> Result<Tensor> {
        let x = self.embed(ids, batch, side)?;
        let (len, d) = (x.shape()[1], x.shape()[2]);
        let pe = Tensor::new(&[len, d], positional_encoding(len, d, self.config.max_position)?)?;
        dropout.apply(&x.add(&pe)?)
    }

    /// Encoder states `[batch, src_len, d_model]` for a padded source matrix.
    pub fn encode(&self, source: &[u32], batch: usize, dropout: &mut Dropout) -> Result<Tensor> {
        let h = self.config.n_heads;
        let mut x = self.embed_with_positions(source, batch, Side::Source, dropout)?;
        let len = x.shape()[1];
        let mask = build_mask(source, batch, h, len, false);
        for layer in &self.params.encoder {
            let a = multi_head_attention(&x, &x, &layer.self_attn, h, Some(&mask))?.output;
            x = residual_norm(&x, &dropout.apply(&a)?, &layer.norm1)?;
            let f = layer.ff.forward(&x)?;
            x = residual_norm(&x, &dropout.apply(&f)?, &layer.norm2)?;
        }
        Ok(x)
    }

    /// Next-token logits `[batch, tgt_len, |V_T|]` for decoder inputs `target`
    /// attending to `memory` (encoded from `source`).
    pub fn decode(
        &self,
        memory: &Tensor,
        source: &[u32],
        target: &[u32],
        batch: usize,
        dropout: &mut Dropout,
    ) -> Result<Tensor> {
        let h = self.config.n_heads;
        let mut y = self.embed_with_positions(target, batch, Side::Target, dropout)?;
        let len = y.shape()[1];
        let self_mask = build_mask(target, batch, h, len, true);
        let cross_mask = build_mask(source, batch, h, len, false);
        for layer in &self.params.decoder {
            let a = multi_head_attention(&y, &y, &layer.self_attn, h, Some(&self_mask))?.output;
            y = residual_norm(&y, &dropout.apply(&a)?, &layer.norm1)?;
            let c = multi_head_attention(&y, memory, &layer.cross_attn, h, Some(&cross_mask))?.output;
            y = residual_norm(&y, &dropout.apply(&c)?, &layer.norm2)?;
            let f = layer.ff.forward(&y)?;
            y = residual_norm(&y, &dropout.apply(&f)?, &layer.norm3)?;
        }
        self.params.output.forward(&y)
    }

    /// Teacher-forced logits `[batch, tgt_len - 1, |V_T|]`: the decoder reads
    /// each target row without its last token and predicts it shifted by one.
    pub fn forward(&self, batch: &Batch, dropout: &mut Dropout) -> Result<Tensor> {
        let (inputs, _) = shift_targets(batch)?;
        let memory = self.encode(&batch.source, batch.size(), dropout)?;
        self.decode(&memory, &batch.source, &inputs, batch.size(), dropout)
    }

    /// Label-smoothed translation loss `L_T` on one batch.
    pub fn translation_loss(&self, batch: &Batch, dropout: &mut Dropout) -> Result<Tensor> {
        let (_, outputs) = shift_targets(batch)?;
        let logits = self.forward(batch, dropout)?;
        label_smoothed_loss(&logits, &outputs, self.config.label_smoothing)
    }

    /// Greedy translation of one encoded source sentence (with `BOS`/`EOS`).
    /// Returns the generated ids without `BOS` and `EOS`.
    pub fn greedy_decode(&self, source: &[u32], max_len: usize) -> Result<Vec<u32>> {
        no_grad(|| {
            let memory = self.encode(source, 1, &mut Dropout::off())?;
            let mut prefix = vec![BOS];
            let vocab = self.target_vocab();
            while prefix.len() <= max_len {
                let logits = self.decode(&memory, source, &prefix, 1, &mut Dropout::off())?;
                let data = logits.data();
                let last = &data[data.len() - vocab..];
                let next = last
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                    .0 as u32;
                if next == EOS {
                    break;
                }
                prefix.push(next);
            }
            Ok(prefix[1..].to_vec())
        })
    }
}

/// Decoder inputs (`target[:, :-1]`) and prediction targets (`target[:, 1:]`).
pub fn shift_targets(batch: &Batch) -> Result<(Vec<u32>, Vec<u32>)> {
    let len = batch.target_len;
    if len < 2 {
        return Err(WamError::InvalidArgument("target rows need at least BOS and EOS".into()));
    }
    let mut inputs = Vec::with_capacity(batch.size() * (len - 1));
    let mut outputs = Vec::with_capacity(batch.size() * (len - 1));
    for b in 0..batch.size() {
        let row = batch.target_row(b);
        inputs.extend_from_slice(&row[..len - 1]);
        outputs.extend_from_slice(&row[1..]);
    }
    Ok((inputs, outputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EncodedPair, PAD};

    fn model(src: usize, tgt: usize) -> Transformer {
        Transformer::new(TransformerConfig::default(), src, tgt, 7).unwrap()
    }

    fn batch(pairs: &[(Vec<u32>, Vec<u32>)]) -> Batch {
        let encoded: Vec<EncodedPair> = pairs
            .iter()
            .map(|(s, t)| EncodedPair {
                source: s.clone(),
                target: t.clone(),
            })
            .collect();
        Batch::from_pairs(&encoded, &(0..encoded.len()).collect::<Vec<_>>())
    }

    #[test]
    fn embed_scaling_and_duplicates() {
        let m = model(10, 10);
        let raw = m.lookup(&[5, 5], Side::Source).unwrap().to_vec();
        let d = m.config.d_model;
        assert_eq!(raw[..d], raw[d..]);
        let scaled = m.embed(&[5, 5], 1, Side::Source).unwrap();
        assert_eq!(scaled.shape(), &[1, 2, d]);
        let k = (d as f64).sqrt();
        for (s, r) in scaled.to_vec().iter().zip(&raw) {
            assert_eq!(*s, r * k);
        }
        assert!(m.lookup(&[10], Side::Source).is_err());
    }

    #[test]
    fn logits_shape() {
        let m = model(12, 15);
        let b = batch(&[(vec![1, 5, 6, 2], vec![1, 7, 2]), (vec![1, 5, 2], vec![1, 8, 9, 10, 2])]);
        let logits = m.forward(&b, &mut Dropout::off()).unwrap();
        assert_eq!(logits.shape(), &[2, 4, 15]);
    }

    #[test]
    fn future_blindness_is_bitwise() {
        let m = model(12, 15);
        let a = m.forward(&batch(&[(vec![1, 5, 6, 2], vec![1, 7, 8, 9, 2])]), &mut Dropout::off()).unwrap();
        let b = m.forward(&batch(&[(vec![1, 5, 6, 2], vec![1, 7, 8, 13, 2])]), &mut Dropout::off()).unwrap();
        let (a, b) = (a.to_vec(), b.to_vec());
        // the changed token is decoder input 3, so positions 0..3 must match
        assert_eq!(a[..3 * 15], b[..3 * 15]);
        assert_ne!(a[3 * 15..], b[3 * 15..]);
    }

    #[test]
    fn source_padding_is_invisible() {
        let m = model(12, 15);
        let solo = m.forward(&batch(&[(vec![1, 5, 2], vec![1, 7, 2])]), &mut Dropout::off()).unwrap();
        let padded = batch(&[(vec![1, 5, 2], vec![1, 7, 2]), (vec![1, 5, 6, 7, 8, 2], vec![1, 7, 2])]);
        assert_eq!(padded.source_row(0), &[1, 5, 2, PAD, PAD, PAD]);
        let both = m.forward(&padded, &mut Dropout::off()).unwrap().to_vec();
        for (x, y) in solo.to_vec().iter().zip(&both) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_loss_near_log_vocab() {
        let v = 60;
        let m = model(v, v);
        let pairs: Vec<_> = (0..6u32)
            .map(|i| (vec![1, 4 + i, 10 + i, 2], vec![1, 20 + i, 30 + i, 40 + i, 2]))
            .collect();
        let kl = m.translation_loss(&batch(&pairs), &mut Dropout::off()).unwrap().item();
        // KL and cross-entropy differ by the (constant) entropy of the smoothed target
        let q = crate::transformer::smoothed_distribution(v, 20, 0.1).unwrap();
        let entropy: f64 = -q.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
        let expect = (v as f64).ln();
        let ce = kl + entropy;
        assert!((ce - expect).abs() < 0.15 * expect, "cross-entropy {ce} vs ln|V| {expect}");
        assert!((kl - (expect - entropy)).abs() < 0.15 * expect);
    }

    #[test]
    fn dropout_off_is_identity_and_on_is_seeded() {
        let x = Tensor::new(&[4, 4], (0..16).map(f64::from).collect()).unwrap();
        assert_eq!(Dropout::off().apply(&x).unwrap().to_vec(), x.to_vec());
        let a = Dropout::train(0.5, 3).apply(&x).unwrap().to_vec();
        let b = Dropout::train(0.5, 3).apply(&x).unwrap().to_vec();
        assert_eq!(a, b);
        assert!(a.iter().zip(x.to_vec()).all(|(y, v)| *y == 0.0 || *y == 2.0 * v));
    }
}
