use crate::error::{Result, TensorError};
use crate::tensor::{numel, OpKind, Tensor};

/// `c (+)= op(a) · op(b)` where `op(a)` is `m × k` and `op(b)` is `k × n`.
/// A transposed operand is stored row-major in its untransposed layout.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    c: &mut [f64],
    accumulate: bool,
) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: strides describe exactly the m×k, k×n and m×n row-major
    // buffers whose lengths were checked above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn mismatch(op: OpKind, tensors: &[&Tensor]) -> TensorError {
    TensorError::ShapeMismatch {
        op,
        shapes: tensors.iter().map(|t| t.shape().to_vec()).collect(),
    }
}

impl Tensor {
    /// Matrix product over the last two axes.
    ///
    /// * `[.., m, k] × [k, n]` applies the right matrix to every leading row.
    /// * `[b.., m, k] × [b.., k, n]` multiplies batch-wise when the leading
    ///   axes agree.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        let (sa, sb) = (self.shape(), other.shape());
        if sa.len() < 2 || sb.len() < 2 {
            return Err(mismatch(OpKind::MatMul, &[self, other]));
        }
        let k = sa[sa.len() - 1];
        if sb.len() == 2 {
            if sb[0] != k {
                return Err(mismatch(OpKind::MatMul, &[self, other]));
            }
            let n = sb[1];
            let rows = numel(&sa[..sa.len() - 1]);
            let mut shape = sa[..sa.len() - 1].to_vec();
            shape.push(n);
            let mut out = vec![0.0; rows * n];
            gemm(rows, k, n, &self.data(), false, &other.data(), false, &mut out, false);
            return Ok(Tensor::from_op(
                OpKind::MatMul,
                shape,
                out,
                vec![self.clone(), other.clone()],
                Box::new(move |args| {
                    let (a, b) = (&args.parents[0], &args.parents[1]);
                    let ga = a.requires_grad().then(|| {
                        let mut g = vec![0.0; rows * k];
                        gemm(rows, n, k, args.grad, false, &b.data(), true, &mut g, false);
                        g
                    });
                    let gb = b.requires_grad().then(|| {
                        let mut g = vec![0.0; k * n];
                        gemm(k, rows, n, &a.data(), true, args.grad, false, &mut g, false);
                        g
                    });
                    vec![ga, gb]
                }),
            ));
        }

        let batch_a = &sa[..sa.len() - 2];
        if batch_a != &sb[..sb.len() - 2] || sb[sb.len() - 2] != k {
            return Err(mismatch(OpKind::MatMul, &[self, other]));
        }
        let batch = numel(batch_a);
        let m = sa[sa.len() - 2];
        let n = sb[sb.len() - 1];
        let mut shape = batch_a.to_vec();
        shape.extend([m, n]);
        let mut out = vec![0.0; batch * m * n];
        {
            let (a, b) = (self.data(), other.data());
            for i in 0..batch {
                gemm(
                    m,
                    k,
                    n,
                    &a[i * m * k..(i + 1) * m * k],
                    false,
                    &b[i * k * n..(i + 1) * k * n],
                    false,
                    &mut out[i * m * n..(i + 1) * m * n],
                    false,
                );
            }
        }
        Ok(Tensor::from_op(
            OpKind::MatMul,
            shape,
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |args| {
                let (a, b) = (&args.parents[0], &args.parents[1]);
                let g = args.grad;
                let ga = a.requires_grad().then(|| {
                    let bd = b.data();
                    let mut ga = vec![0.0; batch * m * k];
                    for i in 0..batch {
                        gemm(
                            m,
                            n,
                            k,
                            &g[i * m * n..(i + 1) * m * n],
                            false,
                            &bd[i * k * n..(i + 1) * k * n],
                            true,
                            &mut ga[i * m * k..(i + 1) * m * k],
                            false,
                        );
                    }
                    ga
                });
                let gb = b.requires_grad().then(|| {
                    let ad = a.data();
                    let mut gb = vec![0.0; batch * k * n];
                    for i in 0..batch {
                        gemm(
                            k,
                            m,
                            n,
                            &ad[i * m * k..(i + 1) * m * k],
                            true,
                            &g[i * m * n..(i + 1) * m * n],
                            false,
                            &mut gb[i * k * n..(i + 1) * k * n],
                            false,
                        );
                    }
                    gb
                });
                vec![ga, gb]
            }),
        ))
    }

    /// Swaps the last two axes.
    pub fn transpose(&self) -> Result<Tensor> {
        let r = self.rank();
        if r < 2 {
            return Err(mismatch(OpKind::Transpose, &[self]));
        }
        let mut axes: Vec<usize> = (0..r).collect();
        axes.swap(r - 2, r - 1);
        self.permute_as(&axes, OpKind::Transpose)
    }

    /// Reorders axes: output axis `i` is input axis `axes[i]`.
    pub fn permute(&self, axes: &[usize]) -> Result<Tensor> {
        self.permute_as(axes, OpKind::Permute)
    }

    fn permute_as(&self, axes: &[usize], kind: OpKind) -> Result<Tensor> {
        let shape = self.shape();
        let r = shape.len();
        let mut seen = vec![false; r];
        if axes.len() != r || axes.iter().any(|&a| a >= r || std::mem::replace(&mut seen[a], true)) {
            return Err(TensorError::InvalidArgument {
                op: kind,
                reason: format!("axes {axes:?} are not a permutation of rank {r}"),
            });
        }
        let out_shape: Vec<usize> = axes.iter().map(|&a| shape[a]).collect();
        let index = permutation_index(shape, axes);
        let data = self.data();
        let out: Vec<f64> = index.iter().map(|&i| data[i]).collect();
        drop(data);
        Ok(Tensor::from_op(
            kind,
            out_shape,
            out,
            vec![self.clone()],
            Box::new(move |args| {
                let mut g = vec![0.0; index.len()];
                for (o, &i) in index.iter().enumerate() {
                    g[i] = args.grad[o];
                }
                vec![Some(g)]
            }),
        ))
    }

    /// Same values, new shape.
    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        if numel(shape) != self.numel() {
            return Err(TensorError::ShapeMismatch {
                op: OpKind::Reshape,
                shapes: vec![self.shape().to_vec(), shape.to_vec()],
            });
        }
        Ok(Tensor::from_op(
            OpKind::Reshape,
            shape.to_vec(),
            self.to_vec(),
            vec![self.clone()],
            Box::new(|args| vec![Some(args.grad.to_vec())]),
        ))
    }

    /// Joins tensors along `axis`; all other axes must agree.
    pub fn concat(parts: &[Tensor], axis: usize) -> Result<Tensor> {
        let first = parts.first().ok_or_else(|| TensorError::InvalidArgument {
            op: OpKind::Concat,
            reason: "no inputs".into(),
        })?;
        let rank = first.rank();
        let refs: Vec<&Tensor> = parts.iter().collect();
        if axis >= rank {
            return Err(mismatch(OpKind::Concat, &refs));
        }
        for p in parts {
            let s = p.shape();
            if s.len() != rank || s.iter().zip(first.shape()).enumerate().any(|(i, (a, b))| i != axis && a != b) {
                return Err(mismatch(OpKind::Concat, &refs));
            }
        }
        let outer = numel(&first.shape()[..axis]);
        let inner = numel(&first.shape()[axis + 1..]);
        let widths: Vec<usize> = parts.iter().map(|p| p.shape()[axis] * inner).collect();
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(outer * total);
        for o in 0..outer {
            for (p, &w) in parts.iter().zip(&widths) {
                out.extend_from_slice(&p.data()[o * w..(o + 1) * w]);
            }
        }
        let mut shape = first.shape().to_vec();
        shape[axis] = parts.iter().map(|p| p.shape()[axis]).sum();
        Ok(Tensor::from_op(
            OpKind::Concat,
            shape,
            out,
            parts.to_vec(),
            Box::new(move |args| {
                let mut grads: Vec<Vec<f64>> = widths.iter().map(|w| Vec::with_capacity(w * outer)).collect();
                let mut offset = 0;
                for _ in 0..outer {
                    for (g, &w) in grads.iter_mut().zip(&widths) {
                        g.extend_from_slice(&args.grad[offset..offset + w]);
                        offset += w;
                    }
                }
                grads.into_iter().map(Some).collect()
            }),
        ))
    }
}

/// For each output position (row-major), the flat input index it reads.
fn permutation_index(shape: &[usize], axes: &[usize]) -> Vec<usize> {
    let r = shape.len();
    let mut in_strides = vec![1usize; r];
    for i in (0..r.saturating_sub(1)).rev() {
        in_strides[i] = in_strides[i + 1] * shape[i + 1];
    }
    let out_shape: Vec<usize> = axes.iter().map(|&a| shape[a]).collect();
    let strides: Vec<usize> = axes.iter().map(|&a| in_strides[a]).collect();
    let total = numel(shape);
    let mut index = Vec::with_capacity(total);
    let mut counter = vec![0usize; r];
    let mut offset = 0usize;
    for _ in 0..total {
        index.push(offset);
        for ax in (0..r).rev() {
            counter[ax] += 1;
            offset += strides[ax];
            if counter[ax] < out_shape[ax] {
                break;
            }
            offset -= strides[ax] * counter[ax];
            counter[ax] = 0;
        }
    }
    index
}
