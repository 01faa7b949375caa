use serde::{Deserialize, Serialize};
use wam_core::{OpKind, Tensor};

use crate::error::{Result, WamError};

/// Multi-scale RBF kernel over bandwidths `σ = 10^i` for `i` in `lo..=hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub lo: i32,
    pub hi: i32,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { lo: -3, hi: 2 }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if self.lo > self.hi {
            errors.push(format!("kernel.lo ({}) must not exceed kernel.hi ({})", self.lo, self.hi));
        }
        if self.lo < -150 || self.hi > 150 {
            errors.push("kernel scale exponents must lie in -150..=150".into());
        }
        errors
    }

    pub fn sigmas(&self) -> Vec<f64> {
        (self.lo..=self.hi).map(|i| 10f64.powi(i)).collect()
    }

    /// `1 / (2σ²)` per scale.
    fn rates(&self) -> Vec<f64> {
        self.sigmas().iter().map(|s| 1.0 / (2.0 * s * s)).collect()
    }
}

/// `Σ_σ exp(-‖x - y‖² / (2σ²))`.
pub fn multiscale_rbf(x: &[f64], y: &[f64], cfg: &KernelConfig) -> Result<f64> {
    if x.len() != y.len() {
        return Err(WamError::InvalidArgument(format!(
            "kernel arguments differ in dimension ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(cfg.sigmas().iter().map(|s| (-d2 / (2.0 * s * s)).exp()).sum())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Visits every ordered row pair of one kernel block, handing over the
/// kernel value and its derivative with respect to the squared distance.
fn for_each_pair(
    xs: &[f64],
    ys: &[f64],
    d: usize,
    rates: &[f64],
    mut f: impl FnMut(usize, usize, f64, f64),
) {
    for (a, x) in xs.chunks_exact(d).enumerate() {
        for (b, y) in ys.chunks_exact(d).enumerate() {
            let d2 = squared_distance(x, y);
            let (mut k, mut dk) = (0.0, 0.0);
            for &r in rates {
                let e = (-r * d2).exp();
                k += e;
                dk -= r * e;
            }
            f(a, b, k, dk);
        }
    }
}

/// Adds `coef · Σ_ab ∂k(x_a, y_b)` to the gradients of `x` and optionally
/// `y`, using `∂k/∂x_a = k'(D) · 2 (x_a - y_b)`.
fn block_gradient(
    xs: &[f64],
    ys: &[f64],
    d: usize,
    rates: &[f64],
    coef: f64,
    gx: &mut [f64],
    mut gy: Option<&mut [f64]>,
) {
    for_each_pair(xs, ys, d, rates, |a, b, _, dk| {
        let w = 2.0 * coef * dk;
        for j in 0..d {
            let diff = w * (xs[a * d + j] - ys[b * d + j]);
            gx[a * d + j] += diff;
            if let Some(gy) = gy.as_deref_mut() {
                gy[b * d + j] -= diff;
            }
        }
    });
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    std::iter::once(0)
        .chain(sizes.iter().scan(0, |acc, &n| {
            *acc += n;
            Some(*acc)
        }))
        .collect()
}

/// Mean over sentences of the biased squared MMD between each sentence's
/// source and target token embeddings. `source` stacks the rows of all
/// source token sets (`source_sizes[i]` rows for sentence `i`), likewise
/// `target`. Every set must be non-empty.
pub fn batch_mmd_loss(
    source: &Tensor,
    source_sizes: &[usize],
    target: &Tensor,
    target_sizes: &[usize],
    cfg: &KernelConfig,
) -> Result<Tensor> {
    let bad = |msg: String| Err(WamError::InvalidArgument(msg));
    if source.rank() != 2 || target.rank() != 2 || source.shape()[1] != target.shape()[1] {
        return bad(format!(
            "token sets must be [n, d] with equal d, got {:?} and {:?}",
            source.shape(),
            target.shape()
        ));
    }
    if source_sizes.is_empty() || source_sizes.len() != target_sizes.len() {
        return bad(format!(
            "need matching non-empty sentence lists, got {} and {}",
            source_sizes.len(),
            target_sizes.len()
        ));
    }
    if source_sizes.iter().chain(target_sizes).any(|&n| n == 0) {
        return bad("empty token set".into());
    }
    let (so, to) = (offsets(source_sizes), offsets(target_sizes));
    if so[so.len() - 1] != source.shape()[0] || to[to.len() - 1] != target.shape()[0] {
        return bad("sentence sizes do not add up to the stacked rows".into());
    }
    let d = source.shape()[1];
    let rates = cfg.rates();
    let m = source_sizes.len() as f64;

    let mut total = 0.0;
    {
        let (s, t) = (source.data(), target.data());
        for i in 0..source_sizes.len() {
            let (si, ti) = (&s[so[i] * d..so[i + 1] * d], &t[to[i] * d..to[i + 1] * d]);
            let (ns, nt) = (source_sizes[i] as f64, target_sizes[i] as f64);
            let block = |x: &[f64], y: &[f64]| {
                let mut acc = 0.0;
                for_each_pair(x, y, d, &rates, |_, _, k, _| acc += k);
                acc
            };
            total += block(si, si) / (ns * ns) + block(ti, ti) / (nt * nt) - 2.0 * block(si, ti) / (ns * nt);
        }
    }

    let (source_sizes, target_sizes) = (source_sizes.to_vec(), target_sizes.to_vec());
    Ok(Tensor::from_op(
        OpKind::Custom("batch_mmd"),
        Vec::new(),
        vec![total / m],
        vec![source.clone(), target.clone()],
        Box::new(move |args| {
            let g = args.grad[0] / m;
            let (s, t) = (args.parents[0].data(), args.parents[1].data());
            let mut gs = vec![0.0; s.len()];
            let mut gt = vec![0.0; t.len()];
            for i in 0..source_sizes.len() {
                let (s0, s1, t0, t1) = (so[i] * d, so[i + 1] * d, to[i] * d, to[i + 1] * d);
                let (ns, nt) = (source_sizes[i] as f64, target_sizes[i] as f64);
                let (gs_i, gt_i) = (&mut gs[s0..s1], &mut gt[t0..t1]);
                // self blocks are symmetric in (a, b): both roles give the same
                // term, hence the doubled coefficient and no second buffer
                block_gradient(&s[s0..s1], &s[s0..s1], d, &rates, 2.0 * g / (ns * ns), gs_i, None);
                block_gradient(&t[t0..t1], &t[t0..t1], d, &rates, 2.0 * g / (nt * nt), gt_i, None);
                block_gradient(&s[s0..s1], &t[t0..t1], d, &rates, -2.0 * g / (ns * nt), gs_i, Some(gt_i));
            }
            vec![Some(gs), Some(gt)]
        }),
    ))
}

/// Biased squared MMD between two token sets `[n_s, d]` and `[n_t, d]`.
pub fn sentence_mmd(source: &Tensor, target: &Tensor, cfg: &KernelConfig) -> Result<Tensor> {
    let (ns, nt) = (source.shape().first().copied(), target.shape().first().copied());
    batch_mmd_loss(source, &[ns.unwrap_or(0)], target, &[nt.unwrap_or(0)], cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_similarity_counts_scales() {
        let cfg = KernelConfig::default();
        assert_eq!(multiscale_rbf(&[0.3, -2.0], &[0.3, -2.0], &cfg).unwrap(), 6.0);
        assert_eq!(KernelConfig { lo: 0, hi: 0 }.sigmas(), vec![1.0]);
    }

    #[test]
    fn unit_distance_value() {
        let k = multiscale_rbf(&[1.0, 0.0], &[0.0, 0.0], &KernelConfig::default()).unwrap();
        let expect = (-50f64).exp() + (-0.5f64).exp() + (-0.005f64).exp() + (-0.00005f64).exp();
        assert!((k - expect).abs() < 1e-15);
        assert!((k - 2.60146).abs() < 1e-4);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(multiscale_rbf(&[1.0], &[1.0, 2.0], &KernelConfig::default()).is_err());
    }

    #[test]
    fn singleton_mmd() {
        let x = Tensor::new(&[1, 2], vec![1.0, 0.0]).unwrap();
        let y = Tensor::new(&[1, 2], vec![0.0, 0.0]).unwrap();
        let cfg = KernelConfig::default();
        let v = sentence_mmd(&x, &y, &cfg).unwrap().item();
        let k = multiscale_rbf(&[1.0, 0.0], &[0.0, 0.0], &cfg).unwrap();
        assert!((v - (12.0 - 2.0 * k)).abs() < 1e-12);
    }

    #[test]
    fn identical_sets_give_zero() {
        let x = Tensor::new(&[3, 2], vec![0.1, 0.5, -0.3, 0.2, 0.9, 0.0]).unwrap();
        assert!(sentence_mmd(&x, &x, &KernelConfig::default()).unwrap().item().abs() <= 1e-12);
    }

    #[test]
    fn size_validation() {
        let x = Tensor::new(&[2, 2], vec![0.0; 4]).unwrap();
        let cfg = KernelConfig::default();
        assert!(batch_mmd_loss(&x, &[1, 1], &x, &[2], &cfg).is_err());
        assert!(batch_mmd_loss(&x, &[2, 0], &x, &[1, 1], &cfg).is_err());
        assert!(batch_mmd_loss(&x, &[1], &x, &[2], &cfg).is_err());
        let empty = Tensor::new(&[0, 2], vec![]).unwrap();
        assert!(sentence_mmd(&empty, &x, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(KernelConfig::default().validate().is_empty());
        assert_eq!(KernelConfig { lo: 1, hi: 0 }.validate().len(), 1);
    }
}
