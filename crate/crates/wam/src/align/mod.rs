//! Localized MMD alignment loss, the combined objective, the supervised
//! landmark baseline and the training loop.

mod kernel;
mod landmark;
mod objective;
mod train;

use serde::{Deserialize, Serialize};
use wam_core::Tensor;

pub use kernel::{batch_mmd_loss, multiscale_rbf, sentence_mmd, KernelConfig};
pub use landmark::{landmark_l2_loss, LandmarkSet};
pub use objective::{objectives, LossTerms, Objective, ObjectiveFactory, ObjectiveSettings};
pub use train::{train, StepRecord, TrainObserver, TrainSettings, TrainSummary};

use crate::corpus::{is_reserved, Batch, Side, PAD};
use crate::error::{Result, WamError};
use crate::transformer::{Dropout, Transformer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlignConfig {
    /// λ in `L = L_T + λ·L_M`.
    pub mmd_weight: f64,
    /// Raw table rows (no `√d_model` factor, no positional encoding).
    pub use_unscaled_embeddings: bool,
    /// Drop every reserved token (`PAD`, `BOS`, `EOS`, `UNK`) from the token
    /// sets; otherwise only `PAD` is dropped.
    pub exclude_special_tokens: bool,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            mmd_weight: 10.0,
            use_unscaled_embeddings: true,
            exclude_special_tokens: true,
        }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Vec<String> {
        if self.mmd_weight.is_finite() && self.mmd_weight >= 0.0 {
            Vec::new()
        } else {
            vec![format!("align.mmd_weight must be finite and >= 0, got {}", self.mmd_weight)]
        }
    }
}

/// Per-sentence token ids of a batch, stacked, with empty pairs removed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenSets {
    pub source: Vec<u32>,
    pub source_sizes: Vec<usize>,
    pub target: Vec<u32>,
    pub target_sizes: Vec<usize>,
    /// Pairs dropped because a side had no tokens left after filtering.
    pub skipped: usize,
}

impl TokenSets {
    pub fn from_batch(batch: &Batch, exclude_special: bool) -> TokenSets {
        let keep = |id: &&u32| if exclude_special { !is_reserved(**id) } else { **id != PAD };
        let mut sets = TokenSets::default();
        for b in 0..batch.size() {
            let s: Vec<u32> = batch.source_row(b).iter().filter(keep).copied().collect();
            let t: Vec<u32> = batch.target_row(b).iter().filter(keep).copied().collect();
            if s.is_empty() || t.is_empty() {
                sets.skipped += 1;
                continue;
            }
            sets.source_sizes.push(s.len());
            sets.target_sizes.push(t.len());
            sets.source.extend(s);
            sets.target.extend(t);
        }
        sets
    }

    /// Number of sentence pairs kept.
    pub fn len(&self) -> usize {
        self.source_sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_sizes.is_empty()
    }
}

/// `L_M` for a batch: mean sentence MMD between the source-table and
/// target-table embeddings of each pair's tokens. `None` when every pair was
/// skipped.
pub fn embedding_mmd(
    model: &Transformer,
    sets: &TokenSets,
    align: &AlignConfig,
    kernel: &KernelConfig,
) -> Result<Option<Tensor>> {
    if sets.is_empty() {
        return Ok(None);
    }
    let embed = |ids: &[u32], side| -> Result<Tensor> {
        let rows = model.lookup(ids, side)?;
        Ok(if align.use_unscaled_embeddings {
            rows
        } else {
            rows.scale((model.config.d_model as f64).sqrt())
        })
    };
    let xs = embed(&sets.source, Side::Source)?;
    let xt = embed(&sets.target, Side::Target)?;
    batch_mmd_loss(&xs, &sets.source_sizes, &xt, &sets.target_sizes, kernel).map(Some)
}

/// The three terms of the combined objective on one batch.
pub struct WamLoss {
    /// `L_T + λ·L_M` (just `L_T` when no pair has a token set).
    pub total: Tensor,
    pub translation: Tensor,
    pub mmd: Option<Tensor>,
    pub skipped: usize,
}

pub fn wam_loss(
    model: &Transformer,
    batch: &Batch,
    align: &AlignConfig,
    kernel: &KernelConfig,
    dropout: &mut Dropout,
) -> Result<WamLoss> {
    let errors = align.validate();
    if !errors.is_empty() {
        return Err(WamError::Config(errors));
    }
    let translation = model.translation_loss(batch, dropout)?;
    let sets = TokenSets::from_batch(batch, align.exclude_special_tokens);
    let mmd = embedding_mmd(model, &sets, align, kernel)?;
    let total = match &mmd {
        Some(m) => translation.add(&m.scale(align.mmd_weight))?,
        None => translation.clone(),
    };
    Ok(WamLoss {
        total,
        translation,
        mmd,
        skipped: sets.skipped,
    })
}
