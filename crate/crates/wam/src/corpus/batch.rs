use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::vocab::PAD;

/// Pairs shuffled together before length sorting.
pub const BUCKET_PAIRS: usize = 1024;

/// A vocabulary-encoded sentence pair; both sides carry `BOS` and `EOS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPair {
    pub source: Vec<u32>,
    pub target: Vec<u32>,
}

impl EncodedPair {
    /// Target tokens excluding `BOS`/`EOS`.
    pub fn target_tokens(&self) -> usize {
        self.target.len().saturating_sub(2)
    }
}

/// Padded id matrices for a group of pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// Row-major `[size, source_len]`.
    pub source: Vec<u32>,
    /// Row-major `[size, target_len]`.
    pub target: Vec<u32>,
    pub source_len: usize,
    pub target_len: usize,
    pub source_lengths: Vec<usize>,
    pub target_lengths: Vec<usize>,
    /// Non-pad target tokens, excluding `BOS`/`EOS`.
    pub token_count: usize,
    /// Positions of the member pairs in the input slice.
    pub indices: Vec<usize>,
}

impl Batch {
    pub fn from_pairs(pairs: &[EncodedPair], indices: &[usize]) -> Batch {
        let source_len = indices.iter().map(|&i| pairs[i].source.len()).max().unwrap_or(0);
        let target_len = indices.iter().map(|&i| pairs[i].target.len()).max().unwrap_or(0);
        let mut source = Vec::with_capacity(indices.len() * source_len);
        let mut target = Vec::with_capacity(indices.len() * target_len);
        for &i in indices {
            let p = &pairs[i];
            source.extend(&p.source);
            source.extend(std::iter::repeat_n(PAD, source_len - p.source.len()));
            target.extend(&p.target);
            target.extend(std::iter::repeat_n(PAD, target_len - p.target.len()));
        }
        Batch {
            source,
            target,
            source_len,
            target_len,
            source_lengths: indices.iter().map(|&i| pairs[i].source.len()).collect(),
            target_lengths: indices.iter().map(|&i| pairs[i].target.len()).collect(),
            token_count: indices.iter().map(|&i| pairs[i].target_tokens()).sum(),
            indices: indices.to_vec(),
        }
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn source_row(&self, b: usize) -> &[u32] {
        &self.source[b * self.source_len..(b + 1) * self.source_len]
    }

    pub fn target_row(&self, b: usize) -> &[u32] {
        &self.target[b * self.target_len..(b + 1) * self.target_len]
    }
}

/// Seeded shuffle, length sort inside buckets of [`BUCKET_PAIRS`], greedy
/// packing under `token_budget` target tokens, then a shuffle of batch order.
/// A pair longer than the budget forms its own batch.
pub fn make_batches(pairs: &[EncodedPair], token_budget: usize, seed: u64) -> Vec<Batch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut rng);

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for bucket in order.chunks_mut(BUCKET_PAIRS) {
        bucket.sort_by_key(|&i| pairs[i].target_tokens());
        let mut current: Vec<usize> = Vec::new();
        let mut tokens = 0;
        for &i in bucket.iter() {
            let n = pairs[i].target_tokens();
            if !current.is_empty() && tokens + n > token_budget {
                groups.push(std::mem::take(&mut current));
                tokens = 0;
            }
            current.push(i);
            tokens += n;
        }
        if !current.is_empty() {
            groups.push(current);
        }
    }
    groups.shuffle(&mut rng);
    groups.iter().map(|g| Batch::from_pairs(pairs, g)).collect()
}
