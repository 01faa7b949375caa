//! Dense row-major `f64` tensors that record the operations producing them.
//!
//! Every op builds a new [`Tensor`] and, when any input requires gradients
//! and recording is enabled, attaches a creator node holding the inputs and a
//! backward closure. The graph is rebuilt on every forward pass and dropped
//! together with its root.

use std::cell::{Cell, Ref, RefCell, RefMut};
use std::fmt;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Result, TensorError};

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

thread_local! {
    static GRAD_ENABLED: Cell<bool> = const { Cell::new(true) };
}

/// Operation kinds, used for graph introspection and error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    MatMul,
    Add,
    Sub,
    Mul,
    Scale,
    AddScalar,
    Exp,
    Relu,
    Softmax,
    LogSoftmax,
    LayerNorm,
    Gather,
    Sum,
    Mean,
    SumSquares,
    RowNorm,
    SquaredDistance,
    Concat,
    Transpose,
    Permute,
    Reshape,
    Custom(&'static str),
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpKind::Custom(name) => f.write_str(name),
            other => write!(f, "{}", format!("{other:?}").to_lowercase()),
        }
    }
}

/// Inputs handed to a backward closure.
pub struct BackwardArgs<'a> {
    /// Gradient of the loss with respect to the op output.
    pub grad: &'a [f64],
    /// Forward value of the op output.
    pub output: &'a [f64],
    pub parents: &'a [Tensor],
}

/// Maps the output gradient to one optional gradient per parent, in parent
/// order. `None` means "no contribution".
pub type BackwardFn = Box<dyn Fn(&BackwardArgs<'_>) -> Vec<Option<Vec<f64>>>>;

pub(crate) struct Creator {
    pub(crate) kind: OpKind,
    pub(crate) parents: Vec<Tensor>,
    pub(crate) backward: BackwardFn,
}

pub(crate) struct Node {
    pub(crate) id: u64,
    pub(crate) shape: Vec<usize>,
    pub(crate) data: RefCell<Vec<f64>>,
    pub(crate) requires_grad: bool,
    pub(crate) creator: Option<Creator>,
}

/// Reference-counted handle to a tensor node. Cloning is cheap and aliases
/// the same storage.
#[derive(Clone)]
pub struct Tensor(pub(crate) Rc<Node>);

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("id", &self.0.id)
            .field("shape", &self.0.shape)
            .field("requires_grad", &self.0.requires_grad)
            .field("creator", &self.0.creator.as_ref().map(|c| c.kind))
            .finish()
    }
}

pub(crate) fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Returns whether new ops currently record graph nodes on this thread.
pub fn grad_enabled() -> bool {
    GRAD_ENABLED.with(|g| g.get())
}

/// Disables graph recording until dropped.
pub struct NoGradGuard {
    previous: bool,
}

impl NoGradGuard {
    pub fn new() -> Self {
        let previous = GRAD_ENABLED.with(|g| g.replace(false));
        NoGradGuard { previous }
    }
}

impl Default for NoGradGuard {
    fn default() -> Self {
        Self::new()
    }
}

impl Drop for NoGradGuard {
    fn drop(&mut self) {
        GRAD_ENABLED.with(|g| g.set(self.previous));
    }
}

/// Runs `f` without recording any graph nodes.
pub fn no_grad<T>(f: impl FnOnce() -> T) -> T {
    let _guard = NoGradGuard::new();
    f()
}

impl Tensor {
    fn leaf(shape: Vec<usize>, data: Vec<f64>, requires_grad: bool) -> Result<Tensor> {
        if numel(&shape) != data.len() {
            return Err(TensorError::InvalidArgument {
                op: OpKind::Custom("new"),
                reason: format!("shape {:?} holds {} values, got {}", shape, numel(&shape), data.len()),
            });
        }
        Ok(Tensor(Rc::new(Node {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            shape,
            data: RefCell::new(data),
            requires_grad,
            creator: None,
        })))
    }

    /// A constant: never receives gradients.
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        Self::leaf(shape.to_vec(), data, false)
    }

    /// A trainable leaf.
    pub fn param(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        Self::leaf(shape.to_vec(), data, true)
    }

    pub fn zeros(shape: &[usize]) -> Tensor {
        Self::leaf(shape.to_vec(), vec![0.0; numel(shape)], false).expect("consistent shape")
    }

    pub fn scalar(value: f64) -> Tensor {
        Self::leaf(Vec::new(), vec![value], false).expect("consistent shape")
    }

    /// Builds an op output. A creator node is attached only when recording is
    /// enabled and at least one parent requires gradients.
    pub fn from_op(
        kind: OpKind,
        shape: Vec<usize>,
        data: Vec<f64>,
        parents: Vec<Tensor>,
        backward: BackwardFn,
    ) -> Tensor {
        debug_assert_eq!(numel(&shape), data.len(), "{kind}: output shape/data mismatch");
        let requires_grad = grad_enabled() && parents.iter().any(Tensor::requires_grad);
        let creator = requires_grad.then(|| Creator {
            kind,
            parents,
            backward,
        });
        Tensor(Rc::new(Node {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            shape,
            data: RefCell::new(data),
            requires_grad,
            creator,
        }))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn shape(&self) -> &[usize] {
        &self.0.shape
    }

    pub fn rank(&self) -> usize {
        self.0.shape.len()
    }

    pub fn numel(&self) -> usize {
        numel(&self.0.shape)
    }

    pub fn requires_grad(&self) -> bool {
        self.0.requires_grad
    }

    /// The kind of the op that produced this tensor, if it was recorded.
    pub fn creator_kind(&self) -> Option<OpKind> {
        self.0.creator.as_ref().map(|c| c.kind)
    }

    pub fn data(&self) -> Ref<'_, Vec<f64>> {
        self.0.data.borrow()
    }

    /// Mutable access to the values, used for in-place parameter updates.
    /// Mutating a tensor that a live graph still reads corrupts its backward
    /// pass.
    pub fn data_mut(&self) -> RefMut<'_, Vec<f64>> {
        self.0.data.borrow_mut()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.data.borrow().clone()
    }

    /// The single value of a one-element tensor.
    pub fn item(&self) -> f64 {
        let data = self.data();
        assert_eq!(data.len(), 1, "item() on tensor of shape {:?}", self.shape());
        data[0]
    }

    /// A constant copy sharing no graph history.
    pub fn detach(&self) -> Tensor {
        Self::leaf(self.shape().to_vec(), self.to_vec(), false).expect("consistent shape")
    }

    pub fn same_storage(&self, other: &Tensor) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }
}
