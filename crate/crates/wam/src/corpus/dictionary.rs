use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::tokenize;
use crate::error::{Result, WamError};

/// Word translation pairs. A source word may map to several targets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dictionary {
    pub pairs: Vec<(String, String)>,
    pub provenance: String,
}

fn normalize(word: &str) -> String {
    tokenize(word).concat()
}

impl Dictionary {
    /// Builds a dictionary, normalizing words and dropping repeated pairs
    /// while keeping first-seen order.
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>, provenance: impl Into<String>) -> Self {
        let mut seen = HashSet::new();
        let pairs = pairs
            .into_iter()
            .map(|(s, t)| (normalize(&s), normalize(&t)))
            .filter(|p| seen.insert(p.clone()))
            .collect();
        Dictionary {
            pairs,
            provenance: provenance.into(),
        }
    }

    /// Parses MUSE-style text: one whitespace-separated `source target` pair
    /// per line. Blank lines are ignored.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut pairs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                [s, t] => pairs.push((s.to_string(), t.to_string())),
                _ => {
                    return Err(WamError::Parse {
                        path: origin.to_path_buf(),
                        line: n + 1,
                        message: format!("expected 'source target', found {} fields", fields.len()),
                    })
                }
            }
        }
        Ok(Dictionary::new(pairs, origin.display().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| WamError::io(path, e))?;
        Dictionary::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        self.pairs.iter().map(|(s, t)| format!("{s} {t}\n")).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| WamError::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// First `count` pairs and the rest.
    pub fn split_at(&self, count: usize) -> (Dictionary, Dictionary) {
        let count = count.min(self.pairs.len());
        let head = Dictionary {
            pairs: self.pairs[..count].to_vec(),
            provenance: format!("{} (first {count})", self.provenance),
        };
        let tail = Dictionary {
            pairs: self.pairs[count..].to_vec(),
            provenance: format!("{} (after {count})", self.provenance),
        };
        (head, tail)
    }
}
