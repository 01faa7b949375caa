use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformerConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub d_ff: usize,
    pub n_encoder_layers: usize,
    pub n_decoder_layers: usize,
    pub dropout: f64,
    pub label_smoothing: f64,
    pub max_position: usize,
}

impl Default for TransformerConfig {
    /// Desk-scale model.
    fn default() -> Self {
        TransformerConfig {
            d_model: 32,
            n_heads: 2,
            d_ff: 64,
            n_encoder_layers: 2,
            n_decoder_layers: 2,
            dropout: 0.0,
            label_smoothing: 0.1,
            max_position: 256,
        }
    }
}

impl TransformerConfig {
    /// Base transformer sizes.
    pub fn paper_scale() -> Self {
        TransformerConfig {
            d_model: 512,
            n_heads: 8,
            d_ff: 2048,
            n_encoder_layers: 6,
            n_decoder_layers: 6,
            dropout: 0.1,
            label_smoothing: 0.1,
            max_position: 512,
        }
    }

    pub fn d_k(&self) -> usize {
        self.d_model / self.n_heads
    }

    pub fn d_v(&self) -> usize {
        self.d_k()
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.d_model == 0 || self.n_heads == 0 || !self.d_model.is_multiple_of(self.n_heads) {
            errors.push(format!(
                "model.d_model ({}) must be a positive multiple of model.n_heads ({})",
                self.d_model, self.n_heads
            ));
        }
        if self.d_ff == 0 {
            errors.push("model.d_ff must be positive".into());
        }
        if self.n_encoder_layers == 0 || self.n_decoder_layers == 0 {
            errors.push("model needs at least one encoder and one decoder layer".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            errors.push(format!("model.dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(0.0..1.0).contains(&self.label_smoothing) {
            errors.push(format!(
                "model.label_smoothing must lie in [0, 1), got {}",
                self.label_smoothing
            ));
        }
        if self.max_position < 2 {
            errors.push("model.max_position must be at least 2".into());
        }
        errors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        assert!(TransformerConfig::default().validate().is_empty());
        let paper = TransformerConfig::paper_scale();
        assert!(paper.validate().is_empty());
        assert_eq!((paper.d_model, paper.n_heads, paper.d_k()), (512, 8, 64));
    }

    #[test]
    fn indivisible_heads_rejected() {
        let cfg = TransformerConfig {
            d_model: 30,
            n_heads: 4,
            label_smoothing: 1.0,
            ..TransformerConfig::default()
        };
        assert_eq!(cfg.validate().len(), 2);
    }
}
