use std::collections::HashSet;

use super::{NeighborIndex, Similarity, WordVectors};
use crate::corpus::Dictionary;
use crate::error::{Result, WamError};

/// `1 - ‖x_s - x_t‖² / ‖x_t - mean(x_t)‖²`: the source vector read as a
/// prediction of the target vector over its coordinates.
pub fn pair_r2(source: &[f64], target: &[f64]) -> Result<f64> {
    if source.len() != target.len() || target.len() < 2 {
        return Err(WamError::InvalidArgument(format!(
            "R² needs two vectors of equal dimension >= 2, got {} and {}",
            source.len(),
            target.len()
        )));
    }
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let total: f64 = target.iter().map(|t| (t - mean) * (t - mean)).sum();
    if total == 0.0 {
        return Err(WamError::Degenerate("constant target vector".into()));
    }
    let residual: f64 = source.iter().zip(target).map(|(s, t)| (s - t) * (s - t)).sum();
    Ok(1.0 - residual / total)
}

/// Dictionary pairs with both words present, as vector positions.
pub fn covered_pairs(dict: &Dictionary, source: &WordVectors, target: &WordVectors) -> Vec<(usize, usize)> {
    dict.pairs
        .iter()
        .filter_map(|(s, t)| Some((source.position(s)?, target.position(t)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct R2Summary {
    pub mean: f64,
    /// Pairs that entered the mean.
    pub used: usize,
    /// Covered pairs skipped because the target vector was constant.
    pub degenerate: usize,
    /// Fraction of dictionary pairs with both words in the vocabularies.
    pub coverage: f64,
}

/// Mean [`pair_r2`] over the covered dictionary pairs.
pub fn avg_r2(dict: &Dictionary, source: &WordVectors, target: &WordVectors) -> Result<R2Summary> {
    if dict.is_empty() {
        return Err(WamError::InvalidArgument("empty dictionary".into()));
    }
    let covered = covered_pairs(dict, source, target);
    let (mut sum, mut used, mut degenerate) = (0.0, 0, 0);
    for &(s, t) in &covered {
        match pair_r2(source.row(s), target.row(t)) {
            Ok(r) => {
                sum += r;
                used += 1;
            }
            Err(WamError::Degenerate(_)) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(WamError::NoCoverage);
    }
    Ok(R2Summary {
        mean: sum / used as f64,
        used,
        degenerate,
        coverage: covered.len() as f64 / dict.len() as f64,
    })
}

/// Source words (first-appearance order) with their in-vocabulary gold
/// targets; words without any covered pair are left out.
fn gold_targets(dict: &Dictionary, source: &WordVectors, target: &WordVectors) -> Vec<(usize, HashSet<usize>)> {
    let mut out: Vec<(usize, HashSet<usize>)> = Vec::new();
    for (s, t) in covered_pairs(dict, source, target) {
        match out.iter_mut().find(|(w, _)| *w == s) {
            Some((_, gold)) => {
                gold.insert(t);
            }
            None => out.push((s, HashSet::from([t]))),
        }
    }
    out
}

/// Fraction of covered source words with any gold translation among the `n`
/// nearest target words, for each `n` in `ns`.
pub fn knn_accuracies(
    dict: &Dictionary,
    source: &WordVectors,
    target: &WordVectors,
    ns: &[usize],
    metric: &dyn Similarity,
) -> Result<Vec<f64>> {
    if dict.is_empty() {
        return Err(WamError::InvalidArgument("empty dictionary".into()));
    }
    if source.dim() != target.dim() {
        return Err(WamError::InvalidArgument(format!(
            "source and target dimensions differ ({} vs {})",
            source.dim(),
            target.dim()
        )));
    }
    let gold = gold_targets(dict, source, target);
    if gold.is_empty() {
        return Err(WamError::NoCoverage);
    }
    let index = NeighborIndex::new(target, metric);
    let depth = ns.iter().copied().max().unwrap_or(0);
    let mut hits = vec![0usize; ns.len()];
    for (s, targets) in &gold {
        let ranked = index.query(source.row(*s), depth);
        if let Some(first) = ranked.iter().position(|(t, _)| targets.contains(t)) {
            for (h, &n) in hits.iter_mut().zip(ns) {
                if first < n {
                    *h += 1;
                }
            }
        }
    }
    Ok(hits.iter().map(|&h| h as f64 / gold.len() as f64).collect())
}

pub fn knn_accuracy(
    dict: &Dictionary,
    source: &WordVectors,
    target: &WordVectors,
    n: usize,
    metric: &dyn Similarity,
) -> Result<f64> {
    Ok(knn_accuracies(dict, source, target, &[n], metric)?[0])
}

/// Number of covered source words, the denominator of the accuracies.
pub fn covered_sources(dict: &Dictionary, source: &WordVectors, target: &WordVectors) -> usize {
    gold_targets(dict, source, target).len()
}
