use std::cmp::Ordering;

use super::{Similarity, WordVectors};

/// Nearest-neighbor search over a target vocabulary.
pub struct NeighborIndex<'a> {
    vectors: &'a WordVectors,
    metric: &'a dyn Similarity,
}

/// Descending score, then ascending position.
fn rank(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

impl<'a> NeighborIndex<'a> {
    pub fn new(vectors: &'a WordVectors, metric: &'a dyn Similarity) -> Self {
        NeighborIndex { vectors, metric }
    }

    pub fn metric(&self) -> &str {
        self.metric.name()
    }

    /// The `n` best `(position, score)` pairs, best first.
    pub fn query(&self, q: &[f64], n: usize) -> Vec<(usize, f64)> {
        let mut scored: Vec<(usize, f64)> = (0..self.vectors.len())
            .map(|i| (i, self.metric.score(q, self.vectors.row(i))))
            .collect();
        let n = n.min(scored.len());
        if n == 0 {
            return Vec::new();
        }
        if n < scored.len() {
            scored.select_nth_unstable_by(n - 1, rank);
            scored.truncate(n);
        }
        scored.sort_by(rank);
        scored
    }
}
