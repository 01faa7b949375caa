use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::SentencePair;
use crate::error::{Result, WamError};

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;
pub const RESERVED: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];
pub const NUM_RESERVED: usize = RESERVED.len();

pub fn is_reserved(id: u32) -> bool {
    (id as usize) < NUM_RESERVED
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Word list of one language. Ids `0..4` are `PAD`, `BOS`, `EOS`, `UNK`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabRepr", into = "VocabRepr")]
pub struct Vocab {
    language: String,
    words: Vec<String>,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    language: String,
    words: Vec<String>,
}

impl TryFrom<VocabRepr> for Vocab {
    type Error = WamError;

    fn try_from(r: VocabRepr) -> Result<Self> {
        Vocab::from_words(r.language, r.words)
    }
}

impl From<Vocab> for VocabRepr {
    fn from(v: Vocab) -> Self {
        VocabRepr {
            language: v.language,
            words: v.words,
        }
    }
}

impl Vocab {
    /// Rebuilds a vocabulary from its full word list, reserved tokens first.
    pub fn from_words(language: impl Into<String>, words: Vec<String>) -> Result<Vocab> {
        if words.len() < NUM_RESERVED || words[..NUM_RESERVED] != RESERVED {
            return Err(WamError::InvalidArgument(
                "vocabulary must start with the reserved tokens".into(),
            ));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(WamError::InvalidArgument(format!("duplicate vocabulary word '{w}'")));
            }
        }
        Ok(Vocab {
            language: language.into(),
            words,
            index,
        })
    }

    /// Words with at least `min_count` occurrences on `side`, by descending
    /// count then lexicographically, after the reserved tokens.
    pub fn build(
        pairs: &[SentencePair],
        side: Side,
        min_count: usize,
        language: impl Into<String>,
    ) -> Result<Vocab> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for p in pairs {
            for t in p.side(side) {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        if counts.is_empty() {
            return Err(WamError::EmptyCorpus(format!("no {side:?} tokens to build a vocabulary")));
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let words = RESERVED
            .iter()
            .map(|s| s.to_string())
            .chain(ranked.into_iter().map(|(w, _)| w.to_string()))
            .collect();
        Vocab::from_words(language, words)
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Id of a non-reserved word, if it is in the vocabulary.
    pub fn corpus_id(&self, word: &str) -> Option<u32> {
        self.get(word).filter(|&id| !is_reserved(id))
    }

    pub fn id(&self, word: &str) -> u32 {
        self.get(word).unwrap_or(UNK)
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    /// `BOS`, token ids (unknown words as `UNK`), `EOS`.
    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        std::iter::once(BOS)
            .chain(tokens.iter().map(|t| self.id(t)))
            .chain(std::iter::once(EOS))
            .collect()
    }

    /// Drops `PAD`, `BOS` and `EOS`; stops at the first `EOS`.
    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .take_while(|&&id| id != EOS)
            .filter(|&&id| id != PAD && id != BOS)
            .map(|&id| self.word(id).unwrap_or(RESERVED[UNK as usize]).to_string())
            .collect()
    }
}
