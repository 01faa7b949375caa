//! Encoder-decoder translation model with separate per-language embedding
//! tables and the label-smoothed translation loss.

mod attention;
mod config;
mod loss;
mod model;
mod params;
mod positional;

pub use attention::{attention, build_mask, multi_head_attention, AttentionOutput, MASK_VALUE};
pub use config::TransformerConfig;
pub use loss::{label_smoothed_loss, smoothed_distribution};
pub use model::{shift_targets, Dropout, Transformer};
pub use params::{
    AttentionParams, DecoderLayer, EmbeddingTable, EncoderLayer, FeedForward, LayerNormParams, Linear, ModelParams,
};
pub use positional::positional_encoding;
