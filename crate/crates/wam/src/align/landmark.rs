use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wam_core::Tensor;

use crate::corpus::{Dictionary, Side, Vocab};
use crate::error::{Result, WamError};
use crate::transformer::Transformer;

/// Known translation pairs as `(source id, target id)`, sampled afresh each
/// epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    pub pairs: Vec<(u32, u32)>,
    pub sample_fraction: f64,
}

impl LandmarkSet {
    pub fn new(pairs: Vec<(u32, u32)>, sample_fraction: f64) -> Result<Self> {
        if pairs.is_empty() {
            return Err(WamError::InvalidArgument("landmark set is empty".into()));
        }
        if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
            return Err(WamError::InvalidArgument(format!(
                "landmark sample fraction must lie in (0, 1], got {sample_fraction}"
            )));
        }
        Ok(LandmarkSet { pairs, sample_fraction })
    }

    /// Dictionary pairs whose words are both in the vocabularies.
    pub fn from_dictionary(dict: &Dictionary, source: &Vocab, target: &Vocab, sample_fraction: f64) -> Result<Self> {
        let pairs = dict
            .pairs
            .iter()
            .filter_map(|(s, t)| Some((source.corpus_id(s)?, target.corpus_id(t)?)))
            .collect();
        LandmarkSet::new(pairs, sample_fraction)
    }

    /// `⌈fraction · |pairs|⌉`
    pub fn sample_size(&self) -> usize {
        ((self.sample_fraction * self.pairs.len() as f64).ceil() as usize).clamp(1, self.pairs.len())
    }

    /// Seeded sample without replacement, in landmark order.
    pub fn sample(&self, seed: u64) -> Vec<(u32, u32)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, self.pairs.len(), self.sample_size()).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| self.pairs[i]).collect()
    }
}

/// Mean L2 distance between the raw source and target embeddings of `pairs`.
pub fn landmark_l2_loss(model: &Transformer, pairs: &[(u32, u32)]) -> Result<Tensor> {
    if pairs.is_empty() {
        return Err(WamError::InvalidArgument("no landmark pairs sampled".into()));
    }
    let (src, tgt): (Vec<u32>, Vec<u32>) = pairs.iter().copied().unzip();
    let diff = model.lookup(&src, Side::Source)?.sub(&model.lookup(&tgt, Side::Target)?)?;
    Ok(diff.row_norm()?.mean()?)
}
