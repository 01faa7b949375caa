use crate::error::{Result, TensorError};
use crate::tensor::{OpKind, Tensor};

impl Tensor {
    /// Sum of all elements, as a scalar.
    pub fn sum(&self) -> Tensor {
        let total = self.data().iter().sum();
        let n = self.numel();
        Tensor::from_op(
            OpKind::Sum,
            Vec::new(),
            vec![total],
            vec![self.clone()],
            Box::new(move |args| vec![Some(vec![args.grad[0]; n])]),
        )
    }

    /// Mean of all elements, as a scalar.
    pub fn mean(&self) -> Result<Tensor> {
        let n = self.numel();
        if n == 0 {
            return Err(TensorError::InvalidArgument {
                op: OpKind::Mean,
                reason: "mean of an empty tensor".into(),
            });
        }
        let total: f64 = self.data().iter().sum();
        Ok(Tensor::from_op(
            OpKind::Mean,
            Vec::new(),
            vec![total / n as f64],
            vec![self.clone()],
            Box::new(move |args| vec![Some(vec![args.grad[0] / n as f64; n])]),
        ))
    }

    /// Squared L2 norm of all elements, as a scalar.
    pub fn sum_squares(&self) -> Tensor {
        let total = self.data().iter().map(|v| v * v).sum();
        Tensor::from_op(
            OpKind::SumSquares,
            Vec::new(),
            vec![total],
            vec![self.clone()],
            Box::new(|args| {
                let g = args.grad[0];
                vec![Some(args.parents[0].data().iter().map(|v| 2.0 * g * v).collect())]
            }),
        )
    }

    /// Euclidean norm along the last axis. The subgradient at a zero vector is
    /// taken as zero.
    pub fn row_norm(&self) -> Result<Tensor> {
        let shape = self.shape();
        let Some((&d, lead)) = shape.split_last() else {
            return Err(TensorError::ShapeMismatch {
                op: OpKind::RowNorm,
                shapes: vec![shape.to_vec()],
            });
        };
        let out: Vec<f64> = if d == 0 {
            vec![0.0; self.numel()]
        } else {
            self.data().chunks(d).map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
        };
        Ok(Tensor::from_op(
            OpKind::RowNorm,
            lead.to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |args| {
                let x = args.parents[0].data();
                let mut g = vec![0.0; x.len()];
                for (r, (row, grow)) in x.chunks(d).zip(g.chunks_mut(d)).enumerate() {
                    let norm = args.output[r];
                    if norm > 0.0 {
                        for (gi, xi) in grow.iter_mut().zip(row) {
                            *gi = args.grad[r] * xi / norm;
                        }
                    }
                }
                vec![Some(g)]
            }),
        ))
    }
}
