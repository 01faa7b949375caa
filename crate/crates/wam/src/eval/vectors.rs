use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{Side, Vocab, NUM_RESERVED};
use crate::error::{Result, WamError};
use crate::transformer::Transformer;

/// Named embedding vectors of one language, reserved tokens excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    words: Vec<String>,
    dim: usize,
    /// Row-major `[words.len(), dim]`.
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

impl WordVectors {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != words.len() * dim {
            return Err(WamError::InvalidArgument(format!(
                "{} words of dimension {dim} need {} values, got {}",
                words.len(),
                words.len() * dim,
                data.len()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(WamError::InvalidArgument(format!("duplicate word '{w}'")));
            }
        }
        Ok(WordVectors { words, dim, data, index })
    }

    /// Raw (unscaled) embedding rows of a model side, in vocabulary order.
    pub fn from_model(model: &Transformer, vocab: &Vocab, side: Side) -> Result<Self> {
        let table = model.table(side);
        if table.rows() != vocab.len() {
            return Err(WamError::InvalidArgument(format!(
                "{side:?} table has {} rows but the vocabulary has {} words",
                table.rows(),
                vocab.len()
            )));
        }
        let d = table.dim();
        let data = table.weight.data()[NUM_RESERVED * d..].to_vec();
        WordVectors::new(vocab.words()[NUM_RESERVED..].to_vec(), d, data)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn position(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.position(word).map(|i| self.row(i))
    }

    /// word2vec text: a `count dim` header, then `word v1 … vd` per line with
    /// shortest round-trip decimal values.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for v in self.row(i) {
                write!(out, " {v}").expect("writing to a string");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| WamError::io(path, e))
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| WamError::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
        let [count, dim] = header[..] else {
            return Err(err(1, "expected header 'count dim'".into()));
        };
        let count: usize = count.parse().map_err(|_| err(1, format!("bad count '{count}'")))?;
        let dim: usize = dim.parse().map_err(|_| err(1, format!("bad dimension '{dim}'")))?;
        let mut words = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("non-blank line has a field");
            let values = fields
                .map(str::parse::<f64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(i + 2, e.to_string()))?;
            if values.len() != dim {
                return Err(err(i + 2, format!("expected {dim} values, found {}", values.len())));
            }
            words.push(word.to_string());
            data.extend(values);
        }
        if words.len() != count {
            return Err(err(1, format!("header announces {count} words, found {}", words.len())));
        }
        WordVectors::new(words, dim, data)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| WamError::io(path, e))?;
        WordVectors::parse(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transformer::TransformerConfig;

    #[test]
    fn export_round_trip_is_exact() {
        let v = WordVectors::new(
            vec!["a".into(), "b".into()],
            3,
            vec![0.1, -1.0 / 3.0, 1e-300, f64::MAX, 2.0, -0.0],
        )
        .unwrap();
        let back = WordVectors::parse(&v.to_text(), Path::new("x")).unwrap();
        assert_eq!(back, v);
        for (a, b) in back.data.iter().zip(&v.data) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn model_export_skips_reserved() {
        let words: Vec<String> = crate::corpus::RESERVED
            .iter()
            .map(|s| s.to_string())
            .chain(["x".into(), "y".into()])
            .collect();
        let vocab = Vocab::from_words("src", words).unwrap();
        let model = Transformer::new(TransformerConfig::default(), 6, 6, 0).unwrap();
        let v = WordVectors::from_model(&model, &vocab, Side::Source).unwrap();
        assert_eq!((v.len(), v.dim()), (2, 32));
        assert_eq!(v.get("y").unwrap(), model.params.source_embedding.row(5).as_slice());
        assert!(v.to_text().starts_with("2 32\n"));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = WordVectors::parse("2 2\na 1 2\nb 1\n", Path::new("v.txt")).unwrap_err();
        assert!(e.to_string().starts_with("v.txt:3:"), "{e}");
        assert!(WordVectors::parse("1 2\na 1 2\nb 3 4\n", Path::new("v")).is_err());
        assert!(WordVectors::parse("", Path::new("v")).is_err());
    }
}
