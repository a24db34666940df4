//! Root bonus on a tree with prescribed boundary values at a fixed depth.
//!
//! Messages flow from the leaves towards the root. A node at depth exactly
//! `depth` is a boundary leaf: it is fed the value `L_k` as the sum of its
//! incoming messages and sends `max(0, w_k - L_k)`. Shallower leaves use the
//! ordinary zero start and send `w_k`. Nodes deeper than `depth` are ignored,
//! so a deeper tree can be evaluated at several depths.
//!
//! With `L = 0` and `depth = t - 1`, the root bonus equals the one max-product
//! computes at iteration `t` on the same tree.

use serde::{Deserialize, Serialize};

use super::MaxProductError;
use crate::graph::Graph;
use crate::weights::NodeWeights;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// `L = 0`: boundary leaves send their weight.
    ZeroInit,
    /// `L = W`: boundary leaves send zero.
    WeightInit,
    /// Per-node values, indexed by graph node; only boundary leaves are read
    /// and each must lie in `[0, w_k]`.
    CustomInit(Vec<f64>),
}

impl BoundaryCondition {
    fn value(&self, k: usize, w: &NodeWeights) -> f64 {
        match self {
            BoundaryCondition::ZeroInit => 0.0,
            BoundaryCondition::WeightInit => w[k],
            BoundaryCondition::CustomInit(l) => l[k],
        }
    }
}

/// Bonus of `root` on `tree` with boundary leaves at `depth`.
pub fn mp_run_tree_boundary(
    tree: &Graph,
    root: usize,
    w: &NodeWeights,
    depth: u32,
    bc: &BoundaryCondition,
) -> Result<f64, MaxProductError> {
    let rooted = tree.root_at(root)?;
    if let BoundaryCondition::CustomInit(l) = bc {
        if l.len() != tree.node_count() {
            return Err(MaxProductError::InvalidBoundary(format!(
                "{} boundary values for {} nodes",
                l.len(),
                tree.node_count()
            )));
        }
        for (k, &d) in rooted.depth.iter().enumerate() {
            if d == depth && !(0.0..=w[k]).contains(&l[k]) {
                return Err(MaxProductError::InvalidBoundary(format!(
                    "L[{k}] = {} outside [0, {}]",
                    l[k], w[k]
                )));
            }
        }
    }

    let mut up = vec![0.0; tree.node_count()];
    for &k in rooted.order.iter().rev() {
        let d = rooted.depth[k];
        if d > depth {
            continue;
        }
        let incoming = if d == depth {
            bc.value(k, w)
        } else {
            let parent = rooted.parent[k];
            let mut sum = 0.0;
            for &c in tree.neighbors(k) {
                if c != parent {
                    sum += up[c];
                }
            }
            sum
        };
        if k == root {
            return Ok(w[k] - incoming);
        }
        up[k] = (w[k] - incoming).max(0.0);
    }
    unreachable!("root is visited last in reverse BFS order")
}
