//! Computation trees: the unrolled tree of non-backtracking walks out of a
//! node, on which `t` rounds of max-product compute an exact tree MWIS.
//!
//! `T_i(1)` is the node `i` alone. `T_i(t)` hangs, below each leaf of
//! `T_i(t - 1)`, a copy of every neighbor of that leaf's origin other than the
//! origin of its parent.

use std::fmt::Write as _;

use thiserror::Error;

use crate::exact::{tree_mwis_classify_with, ExactError, Membership};
use crate::graph::{build_graph, Graph, GraphError};
use crate::maxproduct::{TriState, DEFAULT_TOLERANCE};
use crate::weights::{NodeWeights, WeightError};

/// Largest tree [`unroll`] will build.
pub const MAX_TREE_NODES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompTreeError {
    #[error("computation tree would exceed {MAX_TREE_NODES} nodes")]
    TreeTooLarge,
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Tree nodes are numbered in breadth-first order, so the root is 0 and every
/// parent precedes its children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputationTree {
    pub origin: Vec<usize>,
    /// `usize::MAX` for the root.
    pub parent: Vec<usize>,
    /// The root is on level 1.
    pub level: Vec<u32>,
}

impl ComputationTree {
    pub fn len(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    pub fn depth(&self) -> u32 {
        self.level.last().copied().unwrap_or(0)
    }

    pub fn children(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        // BFS numbering keeps each node's children contiguous.
        (k + 1..self.len())
            .skip_while(move |&c| self.parent[c] < k)
            .take_while(move |&c| self.parent[c] == k)
    }

    pub fn to_graph(&self) -> Graph {
        build_graph(self.len(), (1..self.len()).map(|k| (self.parent[k], k)))
            .expect("parent links form a tree")
    }

    pub fn weights(&self, w: &NodeWeights) -> NodeWeights {
        NodeWeights::new(self.origin.iter().map(|&o| w[o]).collect())
            .expect("copies of valid weights")
    }

    /// Graphviz text; labels show `origin (weight)`.
    pub fn to_dot(&self, w: &NodeWeights) -> String {
        let mut out = String::from("graph computation_tree {\n");
        for k in 0..self.len() {
            let o = self.origin[k];
            let _ = writeln!(out, "  n{k} [label=\"{o} ({})\"];", w[o]);
        }
        for k in 1..self.len() {
            let _ = writeln!(out, "  n{} -- n{k};", self.parent[k]);
        }
        out.push_str("}\n");
        out
    }
}

/// Builds `T_i(t)` level by level.
pub fn unroll(g: &Graph, i: usize, t: u32) -> Result<ComputationTree, CompTreeError> {
    g.check_node(i)?;
    if t == 0 {
        return Err(CompTreeError::ZeroDepth);
    }
    let mut tree = ComputationTree {
        origin: vec![i],
        parent: vec![usize::MAX],
        level: vec![1],
    };
    let mut frontier = 0..1;
    for level in 2..=t {
        let start = tree.len();
        for k in frontier {
            let o = tree.origin[k];
            let back = tree
                .parent
                .get(k)
                .and_then(|&p| tree.origin.get(p))
                .copied();
            for &c in g.neighbors(o) {
                if Some(c) == back {
                    continue;
                }
                if tree.len() >= MAX_TREE_NODES {
                    return Err(CompTreeError::TreeTooLarge);
                }
                tree.origin.push(c);
                tree.parent.push(k);
                tree.level.push(level);
            }
        }
        frontier = start..tree.len();
    }
    Ok(tree)
}

/// `|T_i(t)|` from the recurrence over directed edges, without building the
/// tree. Saturates at `u128::MAX`.
pub fn tree_size(g: &Graph, i: usize, t: u32) -> Result<u128, CompTreeError> {
    g.check_node(i)?;
    if t == 0 {
        return Err(CompTreeError::ZeroDepth);
    }
    // below[a] = size of the subtree hanging from the head of arc a, with
    // `levels` levels, when entered along a.
    let mut below = vec![1u128; g.arc_count()];
    for _ in 2..t {
        let next: Vec<u128> = (0..g.arc_count())
            .map(|a| {
                let (_, head) = g.arc(a);
                g.incoming_arcs(head)
                    .iter()
                    .filter(|&&b| b != a)
                    .fold(1u128, |s, &b| {
                        s.saturating_add(below[Graph::reverse_arc(b)])
                    })
            })
            .collect();
        below = next;
    }
    if t == 1 {
        return Ok(1);
    }
    Ok(g.incoming_arcs(i).iter().fold(1u128, |s, &b| {
        s.saturating_add(below[Graph::reverse_arc(b)])
    }))
}

/// Membership of the root of `T_i(t)` across all MWIS of the tree, as a
/// max-product estimate.
pub fn classify_root(
    g: &Graph,
    w: &NodeWeights,
    i: usize,
    t: u32,
) -> Result<TriState, CompTreeError> {
    classify_root_with(g, w, i, t, DEFAULT_TOLERANCE)
}

pub fn classify_root_with(
    g: &Graph,
    w: &NodeWeights,
    i: usize,
    t: u32,
    tolerance: f64,
) -> Result<TriState, CompTreeError> {
    if w.len() != g.node_count() {
        return Err(WeightError::LengthMismatch {
            expected: g.node_count(),
            got: w.len(),
        }
        .into());
    }
    let tree = unroll(g, i, t)?;
    let result = tree_mwis_classify_with(&tree.to_graph(), 0, &tree.weights(w), tolerance)?;
    let root = result.classification.expect("tree solver classifies")[0];
    Ok(match root {
        Membership::InEvery => TriState::One,
        Membership::InNone => TriState::Zero,
        Membership::InSome => TriState::Unknown,
    })
}
