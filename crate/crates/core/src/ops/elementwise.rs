use crate::error::{Result, TensorError};
use crate::tensor::{OpKind, Tensor};

/// Number of times `rhs` repeats inside `lhs` when `rhs`'s shape is a
/// suffix of `lhs`'s shape.
fn broadcast_repeats(op: OpKind, lhs: &Tensor, rhs: &Tensor) -> Result<usize> {
    let (a, b) = (lhs.shape(), rhs.shape());
    if b.len() <= a.len() && a[a.len() - b.len()..] == *b {
        Ok(lhs.numel() / rhs.numel().max(1))
    } else {
        Err(TensorError::ShapeMismatch {
            op,
            shapes: vec![a.to_vec(), b.to_vec()],
        })
    }
}

/// Sums a gradient over broadcast repeats back to the operand's size.
fn reduce_repeats(grad: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for chunk in grad.chunks(len) {
        for (o, g) in out.iter_mut().zip(chunk) {
            *o += g;
        }
    }
    out
}

impl Tensor {
    /// Elementwise sum. `other` may have a suffix of this tensor's shape, in
    /// which case it is repeated across the leading axes.
    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.add_signed(other, 1.0, OpKind::Add)
    }

    /// Elementwise difference, broadcasting like [`Tensor::add`].
    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.add_signed(other, -1.0, OpKind::Sub)
    }

    fn add_signed(&self, other: &Tensor, sign: f64, kind: OpKind) -> Result<Tensor> {
        broadcast_repeats(kind, self, other)?;
        let len = other.numel();
        let mut out = self.to_vec();
        {
            let b = other.data();
            for chunk in out.chunks_mut(len.max(1)) {
                for (o, v) in chunk.iter_mut().zip(b.iter()) {
                    *o += sign * v;
                }
            }
        }
        Ok(Tensor::from_op(
            kind,
            self.shape().to_vec(),
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |args| {
                let ga = args.parents[0].requires_grad().then(|| args.grad.to_vec());
                let gb = args.parents[1].requires_grad().then(|| {
                    let mut g = reduce_repeats(args.grad, len);
                    if sign < 0.0 {
                        g.iter_mut().for_each(|v| *v = -*v);
                    }
                    g
                });
                vec![ga, gb]
            }),
        ))
    }

    /// Elementwise (Hadamard) product, broadcasting like [`Tensor::add`].
    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        broadcast_repeats(OpKind::Mul, self, other)?;
        let len = other.numel();
        let mut out = self.to_vec();
        {
            let b = other.data();
            for chunk in out.chunks_mut(len.max(1)) {
                for (o, v) in chunk.iter_mut().zip(b.iter()) {
                    *o *= v;
                }
            }
        }
        Ok(Tensor::from_op(
            OpKind::Mul,
            self.shape().to_vec(),
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |args| {
                let (a, b) = (&args.parents[0], &args.parents[1]);
                let ga = a.requires_grad().then(|| {
                    let bd = b.data();
                    let mut g = args.grad.to_vec();
                    for chunk in g.chunks_mut(len.max(1)) {
                        for (o, v) in chunk.iter_mut().zip(bd.iter()) {
                            *o *= v;
                        }
                    }
                    g
                });
                let gb = b.requires_grad().then(|| {
                    let ad = a.data();
                    let prod: Vec<f64> = args.grad.iter().zip(ad.iter()).map(|(g, x)| g * x).collect();
                    reduce_repeats(&prod, len)
                });
                vec![ga, gb]
            }),
        ))
    }

    /// Multiplies every element by a constant.
    pub fn scale(&self, factor: f64) -> Tensor {
        let out = self.data().iter().map(|v| v * factor).collect();
        Tensor::from_op(
            OpKind::Scale,
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |args| vec![Some(args.grad.iter().map(|g| g * factor).collect())]),
        )
    }

    pub fn add_scalar(&self, value: f64) -> Tensor {
        let out = self.data().iter().map(|v| v + value).collect();
        Tensor::from_op(
            OpKind::AddScalar,
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(|args| vec![Some(args.grad.to_vec())]),
        )
    }

    pub fn exp(&self) -> Tensor {
        let out = self.data().iter().map(|v| v.exp()).collect();
        Tensor::from_op(
            OpKind::Exp,
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(|args| vec![Some(args.grad.iter().zip(args.output).map(|(g, y)| g * y).collect())]),
        )
    }

    pub fn relu(&self) -> Tensor {
        let out = self.data().iter().map(|v| v.max(0.0)).collect();
        Tensor::from_op(
            OpKind::Relu,
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(|args| {
                let g = args
                    .grad
                    .iter()
                    .zip(args.output)
                    .map(|(g, y)| if *y > 0.0 { *g } else { 0.0 })
                    .collect();
                vec![Some(g)]
            }),
        )
    }
}
