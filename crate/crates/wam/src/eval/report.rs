use serde::{Deserialize, Serialize};

use super::{avg_r2, covered_pairs, covered_sources, knn_accuracies, Similarity, WordVectors};
use crate::corpus::Dictionary;
use crate::error::Result;

/// Alignment quality of one pair of embedding tables against a dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub avg_r2: f64,
    pub acc1: f64,
    pub acc5: f64,
    pub acc10: f64,
    pub coverage: f64,
    /// Dictionary pairs.
    pub n_pairs: usize,
    /// Pairs with both words in the vocabularies.
    pub n_covered: usize,
    /// Covered source words (accuracy denominator).
    pub n_sources: usize,
    /// Covered pairs left out of `avg_r2` for a constant target vector.
    pub n_degenerate: usize,
    pub metric: String,
}

impl EvalReport {
    pub fn compute(
        dict: &Dictionary,
        source: &WordVectors,
        target: &WordVectors,
        metric: &dyn Similarity,
    ) -> Result<EvalReport> {
        let acc = knn_accuracies(dict, source, target, &[1, 5, 10], metric)?;
        let r2 = avg_r2(dict, source, target)?;
        let report = EvalReport {
            avg_r2: r2.mean,
            acc1: acc[0],
            acc5: acc[1],
            acc10: acc[2],
            coverage: r2.coverage,
            n_pairs: dict.len(),
            n_covered: covered_pairs(dict, source, target).len(),
            n_sources: covered_sources(dict, source, target),
            n_degenerate: r2.degenerate,
            metric: metric.name().to_string(),
        };
        report.check();
        Ok(report)
    }

    /// Accuracy nesting and ranges; a violation is a bug, not bad input.
    fn check(&self) {
        assert!(
            self.acc1 <= self.acc5 && self.acc5 <= self.acc10,
            "accuracies not nested: {} {} {}",
            self.acc1,
            self.acc5,
            self.acc10
        );
        for v in [self.acc1, self.acc5, self.acc10, self.coverage] {
            assert!((0.0..=1.0).contains(&v), "metric {v} outside [0, 1]");
        }
        assert!(self.avg_r2 <= 1.0, "R² above 1: {}", self.avg_r2);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain report serializes")
    }
}

impl std::fmt::Display for EvalReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "avg_r2 {:.4}  acc@1 {:.4}  acc@5 {:.4}  acc@10 {:.4}  coverage {:.4} ({}/{} pairs, {} source words, {})",
            self.avg_r2, self.acc1, self.acc5, self.acc10, self.coverage, self.n_covered, self.n_pairs, self.n_sources, self.metric
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Cosine;

    #[test]
    fn identical_tables_score_perfectly() {
        let words: Vec<String> = (0..20).map(|i| format!("w{i}")).collect();
        let data: Vec<f64> = (0..60).map(|i| ((i * 7919) % 101) as f64 / 10.0 - 5.0).collect();
        let v = WordVectors::new(words.clone(), 3, data).unwrap();
        let dict = Dictionary::new(words.iter().map(|w| (w.clone(), w.clone())), "id");
        let r = EvalReport::compute(&dict, &v, &v, &Cosine).unwrap();
        assert_eq!((r.acc1, r.acc5, r.acc10, r.avg_r2, r.coverage), (1.0, 1.0, 1.0, 1.0, 1.0));
        let back: EvalReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
