//! Tokenization, filtering, vocabularies, batching, dictionaries and the
//! synthetic cipher corpus.

mod batch;
mod dictionary;
mod synth;
mod tokenize;
mod vocab;

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use batch::{make_batches, Batch, EncodedPair, BUCKET_PAIRS};
pub use dictionary::Dictionary;
pub use synth::{cipher_corpus, source_word, target_word, CipherSpec};
pub use tokenize::tokenize;
pub use vocab::{is_reserved, Side, Vocab, BOS, EOS, NUM_RESERVED, PAD, RESERVED, UNK};

use crate::error::{Result, WamError};

pub const DEFAULT_MAX_LEN: usize = 80;
pub const DEFAULT_MAX_RATIO: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub source: Vec<String>,
    pub target: Vec<String>,
}

impl SentencePair {
    pub fn new(source: Vec<String>, target: Vec<String>) -> Self {
        SentencePair { source, target }
    }

    pub fn from_text(source: &str, target: &str) -> Self {
        SentencePair::new(tokenize(source), tokenize(target))
    }

    pub fn side(&self, side: Side) -> &[String] {
        match side {
            Side::Source => &self.source,
            Side::Target => &self.target,
        }
    }

    pub fn encode(&self, source: &Vocab, target: &Vocab) -> EncodedPair {
        EncodedPair {
            source: source.encode(&self.source),
            target: target.encode(&self.target),
        }
    }
}

/// Keeps pairs whose sides both have at most `max_len` tokens and whose
/// longer/shorter length ratio is at most `max_ratio`. Pairs with an empty
/// side are dropped.
pub fn filter_pairs(pairs: &[SentencePair], max_len: usize, max_ratio: f64) -> Vec<SentencePair> {
    pairs
        .iter()
        .filter(|p| {
            let (s, t) = (p.source.len(), p.target.len());
            let (short, long) = (s.min(t), s.max(t));
            short > 0 && long <= max_len && long as f64 / short as f64 <= max_ratio
        })
        .cloned()
        .collect()
}

/// Seeded shuffle, then the first `round(fraction * n)` pairs (at least one
/// on each side) become the training split.
pub fn split_train_valid<T: Clone>(items: &[T], fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(WamError::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    if items.len() < 2 {
        return Err(WamError::EmptyCorpus(format!(
            "need at least 2 pairs to split, got {}",
            items.len()
        )));
    }
    let mut shuffled = items.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((items.len() as f64 * fraction).round() as usize).clamp(1, items.len() - 1);
    let valid = shuffled.split_off(n_train);
    Ok((shuffled, valid))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| WamError::io(path, e))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Reads two line-aligned files; line `i` of each forms pair `i`. Pairs with a
/// side that tokenizes to nothing are skipped.
pub fn read_parallel(source: &Path, target: &Path) -> Result<Vec<SentencePair>> {
    let (src, tgt) = (read_lines(source)?, read_lines(target)?);
    if src.len() != tgt.len() {
        return Err(WamError::Parse {
            path: target.to_path_buf(),
            line: src.len().min(tgt.len()) + 1,
            message: format!(
                "parallel files differ in length ({} vs {} lines)",
                src.len(),
                tgt.len()
            ),
        });
    }
    Ok(src
        .iter()
        .zip(&tgt)
        .map(|(s, t)| SentencePair::from_text(s, t))
        .filter(|p| !p.source.is_empty() && !p.target.is_empty())
        .collect())
}

pub fn write_parallel(pairs: &[SentencePair], source: &Path, target: &Path) -> Result<()> {
    let join = |side: Side| -> String {
        pairs.iter().map(|p| p.side(side).join(" ") + "\n").collect()
    };
    fs::write(source, join(Side::Source)).map_err(|e| WamError::io(source, e))?;
    fs::write(target, join(Side::Target)).map_err(|e| WamError::io(target, e))
}
