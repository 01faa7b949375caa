use crate::error::{Result, TensorError};
use crate::tensor::{OpKind, Tensor};

fn last_dim(op: OpKind, t: &Tensor) -> Result<usize> {
    match t.shape().last() {
        Some(&d) if d > 0 => Ok(d),
        _ => Err(TensorError::ShapeMismatch {
            op,
            shapes: vec![t.shape().to_vec()],
        }),
    }
}

impl Tensor {
    /// Softmax over the last axis, computed after subtracting the row max.
    pub fn softmax(&self) -> Result<Tensor> {
        let d = last_dim(OpKind::Softmax, self)?;
        let mut out = self.to_vec();
        for row in out.chunks_mut(d) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            for v in row.iter_mut() {
                *v /= total;
            }
        }
        Ok(Tensor::from_op(
            OpKind::Softmax,
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |args| {
                let mut g = vec![0.0; args.grad.len()];
                for ((gr, y), gx) in args.grad.chunks(d).zip(args.output.chunks(d)).zip(g.chunks_mut(d)) {
                    let dot: f64 = gr.iter().zip(y).map(|(a, b)| a * b).sum();
                    for ((o, gi), yi) in gx.iter_mut().zip(gr).zip(y) {
                        *o = yi * (gi - dot);
                    }
                }
                vec![Some(g)]
            }),
        ))
    }

    /// Log-softmax over the last axis.
    pub fn log_softmax(&self) -> Result<Tensor> {
        let d = last_dim(OpKind::LogSoftmax, self)?;
        let mut out = self.to_vec();
        for row in out.chunks_mut(d) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_total = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
            for v in row.iter_mut() {
                *v -= log_total;
            }
        }
        Ok(Tensor::from_op(
            OpKind::LogSoftmax,
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |args| {
                let mut g = vec![0.0; args.grad.len()];
                for ((gr, y), gx) in args.grad.chunks(d).zip(args.output.chunks(d)).zip(g.chunks_mut(d)) {
                    let total: f64 = gr.iter().sum();
                    for ((o, gi), yi) in gx.iter_mut().zip(gr).zip(y) {
                        *o = gi - yi.exp() * total;
                    }
                }
                vec![Some(g)]
            }),
        ))
    }

    /// Layer normalization over the last axis with learned gain and bias of
    /// that axis' size. Uses the biased variance.
    pub fn layer_norm(&self, gain: &Tensor, bias: &Tensor, eps: f64) -> Result<Tensor> {
        let d = last_dim(OpKind::LayerNorm, self)?;
        if gain.shape() != [d] || bias.shape() != [d] {
            return Err(TensorError::ShapeMismatch {
                op: OpKind::LayerNorm,
                shapes: vec![self.shape().to_vec(), gain.shape().to_vec(), bias.shape().to_vec()],
            });
        }
        let rows = self.numel() / d;
        let mut normed = self.to_vec();
        let mut inv_std = Vec::with_capacity(rows);
        for row in normed.chunks_mut(d) {
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let r = 1.0 / (var + eps).sqrt();
            for v in row.iter_mut() {
                *v = (*v - mean) * r;
            }
            inv_std.push(r);
        }
        let mut out = normed.clone();
        {
            let (g, b) = (gain.data(), bias.data());
            for row in out.chunks_mut(d) {
                for ((v, gi), bi) in row.iter_mut().zip(g.iter()).zip(b.iter()) {
                    *v = *v * gi + bi;
                }
            }
        }
        Ok(Tensor::from_op(
            OpKind::LayerNorm,
            self.shape().to_vec(),
            out,
            vec![self.clone(), gain.clone(), bias.clone()],
            Box::new(move |args| {
                let gain = args.parents[1].data();
                let gx = args.parents[0].requires_grad().then(|| {
                    let mut gx = vec![0.0; args.grad.len()];
                    let mut dxhat = vec![0.0; d];
                    for (r, &inv) in inv_std.iter().enumerate() {
                        let span = r * d..(r + 1) * d;
                        let gy = &args.grad[span.clone()];
                        let xhat = &normed[span.clone()];
                        for i in 0..d {
                            dxhat[i] = gy[i] * gain[i];
                        }
                        let sum_d: f64 = dxhat.iter().sum();
                        let sum_dx: f64 = dxhat.iter().zip(xhat).map(|(a, b)| a * b).sum();
                        let scale = inv / d as f64;
                        for (i, o) in gx[span].iter_mut().enumerate() {
                            *o = scale * (d as f64 * dxhat[i] - sum_d - xhat[i] * sum_dx);
                        }
                    }
                    gx
                });
                let gg = args.parents[1].requires_grad().then(|| {
                    let mut gg = vec![0.0; d];
                    for (gy, xh) in args.grad.chunks(d).zip(normed.chunks(d)) {
                        for i in 0..d {
                            gg[i] += gy[i] * xh[i];
                        }
                    }
                    gg
                });
                let gb = args.parents[2].requires_grad().then(|| {
                    let mut gb = vec![0.0; d];
                    for gy in args.grad.chunks(d) {
                        for i in 0..d {
                            gb[i] += gy[i];
                        }
                    }
                    gb
                });
                vec![gx, gg, gb]
            }),
        ))
    }

    /// Row lookup: `self` is a `[rows, d]` table, output is `[ids.len(), d]`.
    /// The backward pass scatter-adds into exactly the looked-up rows.
    pub fn gather_rows(&self, ids: &[usize]) -> Result<Tensor> {
        if self.rank() != 2 {
            return Err(TensorError::ShapeMismatch {
                op: OpKind::Gather,
                shapes: vec![self.shape().to_vec()],
            });
        }
        let (rows, d) = (self.shape()[0], self.shape()[1]);
        if let Some(&bad) = ids.iter().find(|&&i| i >= rows) {
            return Err(TensorError::IndexOutOfRange {
                op: OpKind::Gather,
                index: bad,
                len: rows,
            });
        }
        let mut out = Vec::with_capacity(ids.len() * d);
        {
            let table = self.data();
            for &i in ids {
                out.extend_from_slice(&table[i * d..(i + 1) * d]);
            }
        }
        let ids = ids.to_vec();
        Ok(Tensor::from_op(
            OpKind::Gather,
            vec![ids.len(), d],
            out,
            vec![self.clone()],
            Box::new(move |args| {
                let mut g = vec![0.0; rows * d];
                for (k, &i) in ids.iter().enumerate() {
                    for (o, v) in g[i * d..(i + 1) * d].iter_mut().zip(&args.grad[k * d..(k + 1) * d]) {
                        *o += v;
                    }
                }
                vec![Some(g)]
            }),
        ))
    }

    /// Pairwise squared Euclidean distances between the rows of `self`
    /// (`[n, d]`) and `other` (`[m, d]`), giving `[n, m]`.
    pub fn squared_distances(&self, other: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 || other.rank() != 2 || self.shape()[1] != other.shape()[1] {
            return Err(TensorError::ShapeMismatch {
                op: OpKind::SquaredDistance,
                shapes: vec![self.shape().to_vec(), other.shape().to_vec()],
            });
        }
        let (n, m, d) = (self.shape()[0], other.shape()[0], self.shape()[1]);
        let mut out = vec![0.0; n * m];
        {
            let (a, b) = (self.data(), other.data());
            for i in 0..n {
                let ai = &a[i * d..(i + 1) * d];
                for j in 0..m {
                    let bj = &b[j * d..(j + 1) * d];
                    out[i * m + j] = ai.iter().zip(bj).map(|(x, y)| (x - y) * (x - y)).sum();
                }
            }
        }
        Ok(Tensor::from_op(
            OpKind::SquaredDistance,
            vec![n, m],
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |args| {
                let (a, b) = (args.parents[0].data(), args.parents[1].data());
                let mut ga = vec![0.0; n * d];
                let mut gb = vec![0.0; m * d];
                for i in 0..n {
                    for j in 0..m {
                        let g = 2.0 * args.grad[i * m + j];
                        if g == 0.0 {
                            continue;
                        }
                        for k in 0..d {
                            let diff = g * (a[i * d + k] - b[j * d + k]);
                            ga[i * d + k] += diff;
                            gb[j * d + k] -= diff;
                        }
                    }
                }
                vec![Some(ga), Some(gb)]
            }),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn softmax_examples() {
        let s = Tensor::new(&[2], vec![0.0, 0.0]).unwrap().softmax().unwrap();
        assert_eq!(s.to_vec(), vec![0.5, 0.5]);
        // exp(k) / (e + e^2 + e^3), evaluated independently
        let e: Vec<f64> = [1.0f64, 2.0, 3.0].iter().map(|v| v.exp()).collect();
        let z: f64 = e.iter().sum();
        let expect: Vec<f64> = e.iter().map(|v| v / z).collect();
        let s = Tensor::new(&[3], vec![1.0, 2.0, 3.0]).unwrap().softmax().unwrap().to_vec();
        assert!(close(&s, &expect, 1e-15));
        assert!(close(&s, &[0.09003, 0.24473, 0.66524], 5e-6));
    }

    #[test]
    fn log_softmax_matches_log_of_softmax() {
        let x = Tensor::new(&[2, 3], vec![1.0, -2.0, 0.5, 100.0, 101.0, 99.0]).unwrap();
        let a: Vec<f64> = x.softmax().unwrap().to_vec().iter().map(|v| v.ln()).collect();
        assert!(close(&x.log_softmax().unwrap().to_vec(), &a, 1e-12));
    }

    #[test]
    fn layer_norm_normalizes() {
        let x = Tensor::new(&[1, 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = Tensor::new(&[4], vec![1.0; 4]).unwrap();
        let b = Tensor::new(&[4], vec![0.0; 4]).unwrap();
        let y = x.layer_norm(&g, &b, 1e-6).unwrap().to_vec();
        let mean: f64 = y.iter().sum::<f64>() / 4.0;
        let var: f64 = y.iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-5);
    }

    #[test]
    fn gather_duplicates_and_bounds() {
        let t = Tensor::new(&[3, 2], vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(t.gather_rows(&[1, 1]).unwrap().to_vec(), vec![2.0, 3.0, 2.0, 3.0]);
        assert!(matches!(
            t.gather_rows(&[3]),
            Err(TensorError::IndexOutOfRange { index: 3, len: 3, .. })
        ));
    }

    #[test]
    fn squared_distance_values() {
        let a = Tensor::new(&[2, 2], vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let b = Tensor::new(&[1, 2], vec![1.0, 0.0]).unwrap();
        assert_eq!(a.squared_distances(&b).unwrap().to_vec(), vec![1.0, 1.0]);
        assert_eq!(a.squared_distances(&a).unwrap().to_vec(), vec![0.0, 2.0, 2.0, 0.0]);
    }
}
