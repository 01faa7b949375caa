use rand::Rng;
use wam_core::init::xavier_uniform;
use wam_core::Tensor;

use super::TransformerConfig;
use crate::error::{Result, WamError};

/// One language's word-embedding matrix, `[vocab, d_model]`.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub language: String,
    pub weight: Tensor,
}

impl EmbeddingTable {
    pub fn rows(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn row(&self, id: usize) -> Vec<f64> {
        let d = self.dim();
        self.weight.data()[id * d..(id + 1) * d].to_vec()
    }
}

#[derive(Debug, Clone)]
pub struct Linear {
    /// `[in, out]`
    pub weight: Tensor,
    pub bias: Option<Tensor>,
}

impl Linear {
    fn init<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize, bias: bool) -> Linear {
        Linear {
            weight: Tensor::param(&[fan_in, fan_out], xavier_uniform(rng, fan_in, fan_out)).expect("shape"),
            bias: bias.then(|| Tensor::param(&[fan_out], vec![0.0; fan_out]).expect("shape")),
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let y = x.matmul(&self.weight)?;
        Ok(match &self.bias {
            Some(b) => y.add(b)?,
            None => y,
        })
    }

    fn collect(&self, prefix: &str, out: &mut Vec<(String, Tensor)>) {
        out.push((format!("{prefix}.weight"), self.weight.clone()));
        if let Some(b) = &self.bias {
            out.push((format!("{prefix}.bias"), b.clone()));
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayerNormParams {
    pub gain: Tensor,
    pub bias: Tensor,
}

impl LayerNormParams {
    fn init(d: usize) -> Self {
        LayerNormParams {
            gain: Tensor::param(&[d], vec![1.0; d]).expect("shape"),
            bias: Tensor::param(&[d], vec![0.0; d]).expect("shape"),
        }
    }

    fn collect(&self, prefix: &str, out: &mut Vec<(String, Tensor)>) {
        out.push((format!("{prefix}.gain"), self.gain.clone()));
        out.push((format!("{prefix}.bias"), self.bias.clone()));
    }
}

/// Query/key/value projections for all heads side by side (`[d_model,
/// n_heads * d_k]`), plus the output projection.
#[derive(Debug, Clone)]
pub struct AttentionParams {
    pub w_q: Tensor,
    pub w_k: Tensor,
    pub w_v: Tensor,
    pub output: Linear,
}

impl AttentionParams {
    fn init<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Self {
        let mut proj = || Tensor::param(&[d, d], xavier_uniform(rng, d, d)).expect("shape");
        let (w_q, w_k, w_v) = (proj(), proj(), proj());
        AttentionParams {
            w_q,
            w_k,
            w_v,
            output: Linear::init(rng, d, d, true),
        }
    }

    fn collect(&self, prefix: &str, out: &mut Vec<(String, Tensor)>) {
        out.push((format!("{prefix}.w_q"), self.w_q.clone()));
        out.push((format!("{prefix}.w_k"), self.w_k.clone()));
        out.push((format!("{prefix}.w_v"), self.w_v.clone()));
        self.output.collect(&format!("{prefix}.out"), out);
    }
}

#[derive(Debug, Clone)]
pub struct FeedForward {
    pub inner: Linear,
    pub outer: Linear,
}

impl FeedForward {
    fn init<R: Rng + ?Sized>(rng: &mut R, d: usize, d_ff: usize) -> Self {
        FeedForward {
            inner: Linear::init(rng, d, d_ff, true),
            outer: Linear::init(rng, d_ff, d, true),
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.outer.forward(&self.inner.forward(x)?.relu())
    }

    fn collect(&self, prefix: &str, out: &mut Vec<(String, Tensor)>) {
        self.inner.collect(&format!("{prefix}.inner"), out);
        self.outer.collect(&format!("{prefix}.outer"), out);
    }
}

#[derive(Debug, Clone)]
pub struct EncoderLayer {
    pub self_attn: AttentionParams,
    pub norm1: LayerNormParams,
    pub ff: FeedForward,
    pub norm2: LayerNormParams,
}

#[derive(Debug, Clone)]
pub struct DecoderLayer {
    pub self_attn: AttentionParams,
    pub norm1: LayerNormParams,
    pub cross_attn: AttentionParams,
    pub norm2: LayerNormParams,
    pub ff: FeedForward,
    pub norm3: LayerNormParams,
}

/// Every trainable tensor of the translation model. Source and target
/// embeddings are separate, and the output projection is not tied to either.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub source_embedding: EmbeddingTable,
    pub target_embedding: EmbeddingTable,
    pub encoder: Vec<EncoderLayer>,
    pub decoder: Vec<DecoderLayer>,
    pub output: Linear,
}

impl ModelParams {
    /// Xavier-uniform weights, zero biases, unit layer-norm gains. Draw order
    /// is fixed, so a seeded `rng` gives reproducible parameters.
    pub fn init<R: Rng + ?Sized>(
        config: &TransformerConfig,
        source_vocab: usize,
        target_vocab: usize,
        rng: &mut R,
    ) -> ModelParams {
        let d = config.d_model;
        let table = |rng: &mut R, rows: usize, language: &str| EmbeddingTable {
            language: language.to_string(),
            weight: Tensor::param(&[rows, d], xavier_uniform(rng, rows, d)).expect("shape"),
        };
        let source_embedding = table(rng, source_vocab, "source");
        let target_embedding = table(rng, target_vocab, "target");
        let encoder = (0..config.n_encoder_layers)
            .map(|_| EncoderLayer {
                self_attn: AttentionParams::init(rng, d),
                norm1: LayerNormParams::init(d),
                ff: FeedForward::init(rng, d, config.d_ff),
                norm2: LayerNormParams::init(d),
            })
            .collect();
        let decoder = (0..config.n_decoder_layers)
            .map(|_| DecoderLayer {
                self_attn: AttentionParams::init(rng, d),
                norm1: LayerNormParams::init(d),
                cross_attn: AttentionParams::init(rng, d),
                norm2: LayerNormParams::init(d),
                ff: FeedForward::init(rng, d, config.d_ff),
                norm3: LayerNormParams::init(d),
            })
            .collect();
        let output = Linear::init(rng, d, target_vocab, true);
        ModelParams {
            source_embedding,
            target_embedding,
            encoder,
            decoder,
            output,
        }
    }

    /// All parameters with stable names, in a fixed order.
    pub fn named(&self) -> Vec<(String, Tensor)> {
        let mut out = vec![
            ("source_embedding".to_string(), self.source_embedding.weight.clone()),
            ("target_embedding".to_string(), self.target_embedding.weight.clone()),
        ];
        for (i, l) in self.encoder.iter().enumerate() {
            let p = format!("encoder.{i}");
            l.self_attn.collect(&format!("{p}.self_attn"), &mut out);
            l.norm1.collect(&format!("{p}.norm1"), &mut out);
            l.ff.collect(&format!("{p}.ff"), &mut out);
            l.norm2.collect(&format!("{p}.norm2"), &mut out);
        }
        for (i, l) in self.decoder.iter().enumerate() {
            let p = format!("decoder.{i}");
            l.self_attn.collect(&format!("{p}.self_attn"), &mut out);
            l.norm1.collect(&format!("{p}.norm1"), &mut out);
            l.cross_attn.collect(&format!("{p}.cross_attn"), &mut out);
            l.norm2.collect(&format!("{p}.norm2"), &mut out);
            l.ff.collect(&format!("{p}.ff"), &mut out);
            l.norm3.collect(&format!("{p}.norm3"), &mut out);
        }
        self.output.collect("output", &mut out);
        out
    }

    pub fn tensors(&self) -> Vec<Tensor> {
        self.named().into_iter().map(|(_, t)| t).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(Tensor::numel).sum()
    }

    /// Overwrites values from `(name, shape, data)` records; every parameter
    /// must be present exactly once with its exact shape.
    pub fn load(&self, records: &[(String, Vec<usize>, Vec<f64>)]) -> Result<()> {
        let named = self.named();
        if records.len() != named.len() {
            return Err(WamError::InvalidArgument(format!(
                "expected {} parameter tensors, found {}",
                named.len(),
                records.len()
            )));
        }
        for (name, tensor) in &named {
            let (_, shape, data) = records
                .iter()
                .find(|(n, _, _)| n == name)
                .ok_or_else(|| WamError::InvalidArgument(format!("missing parameter '{name}'")))?;
            if shape.as_slice() != tensor.shape() || data.len() != tensor.numel() {
                return Err(WamError::InvalidArgument(format!(
                    "parameter '{name}' has shape {shape:?}, expected {:?}",
                    tensor.shape()
                )));
            }
            tensor.data_mut().copy_from_slice(data);
        }
        Ok(())
    }
}
