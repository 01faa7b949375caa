use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{Dictionary, SentencePair};
use crate::error::{Result, WamError};

#[derive(Debug, Clone, PartialEq)]
pub struct CipherSpec {
    pub vocab_size: usize,
    pub sentences: usize,
    /// Inclusive token-count range of each sentence.
    pub min_len: usize,
    pub max_len: usize,
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl Default for CipherSpec {
    fn default() -> Self {
        CipherSpec {
            vocab_size: 200,
            sentences: 2000,
            min_len: 4,
            max_len: 12,
            zipf_exponent: 1.0,
            seed: 0,
        }
    }
}

pub fn source_word(i: usize) -> String {
    format!("s{i}")
}

pub fn target_word(i: usize) -> String {
    format!("t{i}")
}

/// Parallel corpus whose target side is the token-wise image of the source
/// under a random bijection. Source words follow a Zipf law over their rank.
/// Returns the pairs and the bijection as a dictionary in source-rank order.
pub fn cipher_corpus(spec: &CipherSpec) -> Result<(Vec<SentencePair>, Dictionary)> {
    if spec.vocab_size < 10 {
        return Err(WamError::InvalidArgument(format!(
            "vocab_size must be at least 10, got {}",
            spec.vocab_size
        )));
    }
    if spec.min_len == 0 || spec.min_len > spec.max_len {
        return Err(WamError::InvalidArgument(format!(
            "invalid sentence length range {}..={}",
            spec.min_len, spec.max_len
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut cipher: Vec<usize> = (0..spec.vocab_size).collect();
    cipher.shuffle(&mut rng);

    let weights = (1..=spec.vocab_size).map(|rank| (rank as f64).powf(-spec.zipf_exponent));
    let unigram = WeightedIndex::new(weights).expect("positive weights");

    let pairs = (0..spec.sentences)
        .map(|_| {
            let len = rng.gen_range(spec.min_len..=spec.max_len);
            let words: Vec<usize> = (0..len).map(|_| unigram.sample(&mut rng)).collect();
            SentencePair::new(
                words.iter().map(|&w| source_word(w)).collect(),
                words.iter().map(|&w| target_word(cipher[w])).collect(),
            )
        })
        .collect();
    let gold = Dictionary::new(
        (0..spec.vocab_size).map(|w| (source_word(w), target_word(cipher[w]))),
        format!("cipher(seed={})", spec.seed),
    );
    Ok((pairs, gold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn small() -> CipherSpec {
        CipherSpec {
            vocab_size: 30,
            sentences: 50,
            seed: 9,
            ..CipherSpec::default()
        }
    }

    #[test]
    fn equal_lengths_and_token_mapping() {
        let (pairs, gold) = cipher_corpus(&small()).unwrap();
        let map: std::collections::HashMap<_, _> = gold.pairs.iter().cloned().collect();
        for p in &pairs {
            assert_eq!(p.source.len(), p.target.len());
            assert!((4..=12).contains(&p.source.len()));
            for (s, t) in p.source.iter().zip(&p.target) {
                assert_eq!(&map[s], t);
            }
        }
    }

    #[test]
    fn gold_is_a_bijection() {
        let (_, gold) = cipher_corpus(&small()).unwrap();
        assert_eq!(gold.len(), 30);
        let sources: HashSet<_> = gold.pairs.iter().map(|p| &p.0).collect();
        let targets: HashSet<_> = gold.pairs.iter().map(|p| &p.1).collect();
        assert_eq!((sources.len(), targets.len()), (30, 30));
    }

    #[test]
    fn seeded() {
        assert_eq!(cipher_corpus(&small()).unwrap(), cipher_corpus(&small()).unwrap());
        let other = CipherSpec { seed: 10, ..small() };
        assert_ne!(cipher_corpus(&small()).unwrap().0, cipher_corpus(&other).unwrap().0);
    }

    #[test]
    fn tiny_vocab_rejected() {
        assert!(cipher_corpus(&CipherSpec { vocab_size: 9, ..small() }).is_err());
    }
}
