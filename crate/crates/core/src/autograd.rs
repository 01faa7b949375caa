use std::collections::{HashMap, HashSet};

use crate::error::{Result, TensorError};
use crate::tensor::{BackwardArgs, Tensor};

/// Gradients of a scalar loss with respect to every reachable trainable leaf.
#[derive(Debug, Default)]
pub struct Gradients {
    by_id: HashMap<u64, Vec<f64>>,
}

impl Gradients {
    pub fn get(&self, param: &Tensor) -> Option<&[f64]> {
        self.by_id.get(&param.id()).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

fn accumulate(slot: &mut Option<Vec<f64>>, contribution: Vec<f64>) {
    match slot {
        Some(acc) => {
            for (a, c) in acc.iter_mut().zip(&contribution) {
                *a += c;
            }
        }
        None => *slot = Some(contribution),
    }
}

/// Post-order over the recorded graph: every node after all of its parents.
fn topological_order(root: &Tensor) -> Vec<Tensor> {
    let mut order = Vec::new();
    let mut visited = HashSet::new();
    let mut stack = vec![(root.clone(), false)];
    while let Some((node, expanded)) = stack.pop() {
        if expanded {
            order.push(node);
            continue;
        }
        if !visited.insert(node.id()) {
            continue;
        }
        stack.push((node.clone(), true));
        if let Some(creator) = &node.0.creator {
            for parent in creator.parents.iter().rev() {
                if parent.requires_grad() && !visited.contains(&parent.id()) {
                    stack.push((parent.clone(), false));
                }
            }
        }
    }
    order
}

/// Reverse-mode sweep from a scalar loss. Intermediate gradients are dropped
/// as soon as they have been propagated.
pub fn backward(loss: &Tensor) -> Result<Gradients> {
    if loss.numel() != 1 {
        return Err(TensorError::NonScalarLoss(loss.shape().to_vec()));
    }
    let mut grads = Gradients::default();
    if !loss.requires_grad() {
        return Ok(grads);
    }

    let order = topological_order(loss);
    let index: HashMap<u64, usize> = order.iter().enumerate().map(|(i, t)| (t.id(), i)).collect();
    let mut pending: Vec<Option<Vec<f64>>> = vec![None; order.len()];
    pending[order.len() - 1] = Some(vec![1.0]);

    for (i, node) in order.iter().enumerate().rev() {
        let Some(grad) = pending[i].take() else {
            continue;
        };
        match &node.0.creator {
            Some(creator) => {
                let output = node.data();
                let contributions = (creator.backward)(&BackwardArgs {
                    grad: &grad,
                    output: &output,
                    parents: &creator.parents,
                });
                debug_assert_eq!(contributions.len(), creator.parents.len());
                for (parent, contribution) in creator.parents.iter().zip(contributions) {
                    if let (true, Some(c)) = (parent.requires_grad(), contribution) {
                        debug_assert_eq!(c.len(), parent.numel(), "{} backward", creator.kind);
                        accumulate(&mut pending[index[&parent.id()]], c);
                    }
                }
            }
            None => {
                grads.by_id.insert(node.id(), grad);
            }
        }
    }
    Ok(grads)
}
