//! Ground-truth MWIS: branch-and-bound on small graphs, and a two-pass
//! dynamic program on trees that also says, for every node, whether it lies
//! in every, some or no maximum weight independent set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, Graph, GraphError};
use crate::lp::solve_scaled;
use crate::maxproduct::DEFAULT_TOLERANCE;
use crate::weights::{NodeWeights, ScaledWeights, WeightError};

/// Largest graph [`mwis_exact`] accepts.
pub const MAX_EXACT_NODES: usize = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("exact search is limited to {MAX_EXACT_NODES} nodes, graph has {0}")]
    TooLarge(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("node {0} is forced both in and out, or forced in next to another forced node")]
    Infeasible(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Membership {
    InEvery,
    InSome,
    InNone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwisResult {
    /// Sorted node ids of one maximum weight independent set.
    pub set: Vec<usize>,
    pub weight: f64,
    /// Per-node membership across all optima (tree solver only).
    pub classification: Option<Vec<Membership>>,
}

/// Nodes whose value is fixed before the search.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Constraints {
    pub forced_in: Vec<usize>,
    pub forced_out: Vec<usize>,
}

/// Exact MWIS; among optimal sets returns the lexicographically smallest
/// sorted node list.
pub fn mwis_exact(g: &Graph, w: &NodeWeights) -> Result<MwisResult, ExactError> {
    mwis_exact_with(g, w, &Constraints::default())
}

/// Exact MWIS subject to forced memberships.
pub fn mwis_exact_with(
    g: &Graph,
    w: &NodeWeights,
    constraints: &Constraints,
) -> Result<MwisResult, ExactError> {
    let n = g.node_count();
    if n > MAX_EXACT_NODES {
        return Err(ExactError::TooLarge(n));
    }
    if w.len() != n {
        return Err(WeightError::LengthMismatch {
            expected: n,
            got: w.len(),
        }
        .into());
    }
    let scaled = ScaledWeights::new(w)?;
    let adj: Vec<u64> = (0..n)
        .map(|i| g.neighbors(i).iter().fold(0u64, |m, &j| m | bit(j)))
        .collect();
    let mut bb = BranchAndBound {
        adj: &adj,
        w: scaled.as_slice(),
    };

    let mut cand = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut chosen = 0u64;
    for &i in &constraints.forced_out {
        g.check_node(i)?;
        cand &= !bit(i);
    }
    for &i in &constraints.forced_in {
        g.check_node(i)?;
        if cand & bit(i) == 0 {
            return Err(ExactError::Infeasible(i));
        }
        chosen |= bit(i);
        cand &= !(bit(i) | adj[i]);
    }
    let mut acc = bb.weight_of(chosen);
    let best = acc + bb.maximize(cand, bb.greedy(cand));

    // Fix nodes in index order, keeping each one whenever an optimum survives.
    for i in 0..n {
        if cand & bit(i) == 0 {
            continue;
        }
        let with_i = cand & !(bit(i) | adj[i]);
        if bb.reaches(with_i, best - acc - bb.w[i]) {
            chosen |= bit(i);
            acc += bb.w[i];
            cand = with_i;
        } else {
            cand &= !bit(i);
        }
    }
    debug_assert_eq!(acc, best);
    let set: Vec<usize> = (0..n).filter(|&i| chosen & bit(i) != 0).collect();
    Ok(MwisResult {
        weight: w.total_of(&set),
        set,
        classification: None,
    })
}

fn bit(i: usize) -> u64 {
    1u64 << i
}

struct BranchAndBound<'a> {
    adj: &'a [u64],
    w: &'a [i128],
}

impl BranchAndBound<'_> {
    fn weight_of(&self, set: u64) -> i128 {
        ones(set).map(|i| self.w[i]).sum()
    }

    fn greedy(&self, mut cand: u64) -> i128 {
        let mut total = 0;
        while cand != 0 {
            let i = ones(cand)
                .max_by_key(|&i| (self.w[i], std::cmp::Reverse(i)))
                .unwrap();
            total += self.w[i];
            cand &= !(bit(i) | self.adj[i]);
        }
        total
    }

    /// Upper bound on what `cand` can still contribute: the edge LP optimum of
    /// the induced subgraph (rounded down from its doubled value).
    fn bound(&self, cand: u64) -> i128 {
        let nodes: Vec<usize> = ones(cand).collect();
        let mut index = [usize::MAX; 64];
        for (k, &i) in nodes.iter().enumerate() {
            index[i] = k;
        }
        let mut edges = Vec::new();
        for (k, &i) in nodes.iter().enumerate() {
            for j in ones(self.adj[i] & cand) {
                if i < j {
                    edges.push((k, index[j]));
                }
            }
        }
        let sub = build_graph(nodes.len(), edges).expect("induced subgraph");
        let ws: Vec<i128> = nodes.iter().map(|&i| self.w[i]).collect();
        let (_, doubled) = solve_scaled(&sub, &ws);
        doubled / 2
    }

    /// Best weight obtainable from `cand`, or `floor` if nothing beats it.
    fn maximize(&mut self, cand: u64, floor: i128) -> i128 {
        let mut best = floor;
        self.search(cand, 0, &mut best, false);
        best
    }

    /// Whether some independent subset of `cand` weighs at least `need`.
    fn reaches(&mut self, cand: u64, need: i128) -> bool {
        if need <= 0 {
            return true;
        }
        let mut best = need - 1;
        self.search(cand, 0, &mut best, true)
    }

    /// Depth-first search improving `best`; with `first_hit` it stops as soon
    /// as `best` improves once.
    fn search(&mut self, mut cand: u64, mut acc: i128, best: &mut i128, first_hit: bool) -> bool {
        // Nodes with no remaining neighbor are always taken.
        loop {
            let free: u64 = ones(cand)
                .filter(|&i| self.adj[i] & cand == 0)
                .fold(0, |m, i| m | bit(i));
            if free == 0 {
                break;
            }
            acc += self.weight_of(free);
            cand &= !free;
        }
        if cand == 0 {
            if acc > *best {
                *best = acc;
                return true;
            }
            return false;
        }
        if acc + self.weight_of(cand) <= *best || acc + self.bound(cand) <= *best {
            return false;
        }
        let v = ones(cand)
            .max_by_key(|&i| ((self.adj[i] & cand).count_ones(), std::cmp::Reverse(i)))
            .unwrap();
        let mut improved = self.search(
            cand & !(bit(v) | self.adj[v]),
            acc + self.w[v],
            best,
            first_hit,
        );
        if improved && first_hit {
            return true;
        }
        improved |= self.search(cand & !bit(v), acc, best, first_hit);
        improved
    }
}

fn ones(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// Tree MWIS with per-node membership classification, using the default
/// tie tolerance.
pub fn tree_mwis_classify(
    tree: &Graph,
    root: usize,
    w: &NodeWeights,
) -> Result<MwisResult, ExactError> {
    tree_mwis_classify_with(tree, root, w, DEFAULT_TOLERANCE)
}

/// Tree MWIS by dynamic programming.
///
/// The upward pass computes, for every subtree, the best weight with its
/// root taken (`inc`) and not taken (`exc`). The downward pass adds the best
/// completion outside each subtree, giving the global optimum with each node
/// forced in or out. A node whose two values differ by at most `tolerance`
/// is `InSome`; otherwise the larger side decides `InEvery` or `InNone`.
pub fn tree_mwis_classify_with(
    tree: &Graph,
    root: usize,
    w: &NodeWeights,
    tolerance: f64,
) -> Result<MwisResult, ExactError> {
    let rt = tree.root_at(root)?;
    let n = tree.node_count();
    let children = |k: usize| {
        let p = rt.parent[k];
        tree.neighbors(k).iter().copied().filter(move |&c| c != p)
    };

    let mut inc = vec![0.0f64; n];
    let mut exc = vec![0.0f64; n];
    for &k in rt.order.iter().rev() {
        let mut a = w[k];
        let mut o = 0.0;
        for c in children(k) {
            a += exc[c];
            o += inc[c].max(exc[c]);
        }
        inc[k] = a;
        exc[k] = o;
    }

    // Best weight of the tree outside subtree(k), with k's parent in / out.
    let mut out_in = vec![0.0f64; n];
    let mut out_out = vec![0.0f64; n];
    let mut full_in = vec![0.0; n];
    let mut full_out = vec![0.0; n];
    full_in[root] = inc[root];
    full_out[root] = exc[root];
    for &p in &rt.order {
        let kids: Vec<usize> = children(p).collect();
        let m = kids.len();
        // prefix/suffix sums over siblings, so "all but one" needs no subtraction.
        let mut pre_exc = vec![0.0; m + 1];
        let mut pre_max = vec![0.0; m + 1];
        for (idx, &c) in kids.iter().enumerate() {
            pre_exc[idx + 1] = pre_exc[idx] + exc[c];
            pre_max[idx + 1] = pre_max[idx] + inc[c].max(exc[c]);
        }
        let mut suf_exc = vec![0.0; m + 1];
        let mut suf_max = vec![0.0; m + 1];
        for idx in (0..m).rev() {
            let c = kids[idx];
            suf_exc[idx] = suf_exc[idx + 1] + exc[c];
            suf_max[idx] = suf_max[idx + 1] + inc[c].max(exc[c]);
        }
        let (above_in, above_out) = if p == root {
            (0.0, 0.0)
        } else {
            // p taken forces its parent out; p free lets its parent choose.
            (out_out[p], out_in[p].max(out_out[p]))
        };
        for (idx, &k) in kids.iter().enumerate() {
            out_in[k] = w[p] + (pre_exc[idx] + suf_exc[idx + 1]) + above_in;
            out_out[k] = (pre_max[idx] + suf_max[idx + 1]) + above_out;
            full_in[k] = inc[k] + out_out[k];
            full_out[k] = exc[k] + out_in[k].max(out_out[k]);
        }
    }

    let classification = (0..n)
        .map(|k| {
            let margin = if k == root {
                inc[k] - exc[k]
            } else {
                full_in[k] - full_out[k]
            };
            if margin > tolerance {
                Membership::InEvery
            } else if margin < -tolerance {
                Membership::InNone
            } else {
                Membership::InSome
            }
        })
        .collect::<Vec<_>>();

    // Rebuild one optimum top-down; ties resolve towards the classification.
    let mut taken = vec![false; n];
    for &k in &rt.order {
        let parent_taken = k != root && taken[rt.parent[k]];
        taken[k] = !parent_taken
            && match classification[k] {
                Membership::InEvery => true,
                Membership::InNone => false,
                Membership::InSome => inc[k] > exc[k],
            };
    }
    let set: Vec<usize> = (0..n).filter(|&k| taken[k]).collect();
    Ok(MwisResult {
        weight: w.total_of(&set),
        set,
        classification: Some(classification),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[f64]) -> NodeWeights {
        NodeWeights::new(v.to_vec()).unwrap()
    }

    #[test]
    fn path() {
        let g = build_graph(3, [(0, 1), (1, 2)]).unwrap();
        let r = mwis_exact(&g, &w(&[1.0, 3.0, 1.0])).unwrap();
        assert_eq!(r.set, vec![1]);
        assert_eq!(r.weight, 3.0);
    }

    #[test]
    fn triangle() {
        let g = build_graph(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let r = mwis_exact(&g, &w(&[1.0, 2.0, 1.0])).unwrap();
        assert_eq!(r.set, vec![1]);
        assert_eq!(r.weight, 2.0);
    }

    #[test]
    fn edgeless() {
        let g = Graph::edgeless(3);
        let r = mwis_exact(&g, &w(&[1.0, 2.0, 4.0])).unwrap();
        assert_eq!(r.set, vec![0, 1, 2]);
        assert_eq!(r.weight, 7.0);
    }

    #[test]
    fn lexicographic_tie_break() {
        // 4-cycle with unit weights: {0, 2} and {1, 3} tie.
        let g = build_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(mwis_exact(&g, &w(&[1.0; 4])).unwrap().set, vec![0, 2]);
        // Path 0-1-2-3: {0,2}, {0,3}, {1,3} all weigh 2.
        let p = build_graph(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(mwis_exact(&p, &w(&[1.0; 4])).unwrap().set, vec![0, 2]);
    }

    #[test]
    fn forced_memberships() {
        let g = build_graph(3, [(0, 1), (1, 2)]).unwrap();
        let ws = w(&[1.0, 3.0, 1.0]);
        let r = mwis_exact_with(
            &g,
            &ws,
            &Constraints {
                forced_in: vec![0],
                forced_out: vec![],
            },
        )
        .unwrap();
        assert_eq!(r.set, vec![0, 2]);
        let r = mwis_exact_with(
            &g,
            &ws,
            &Constraints {
                forced_in: vec![],
                forced_out: vec![1],
            },
        )
        .unwrap();
        assert_eq!(r.set, vec![0, 2]);
        assert!(mwis_exact_with(
            &g,
            &ws,
            &Constraints {
                forced_in: vec![0, 1],
                forced_out: vec![],
            },
        )
        .is_err());
    }

    #[test]
    fn too_large() {
        let g = Graph::edgeless(41);
        let ws = NodeWeights::uniform(41, 1.0).unwrap();
        assert_eq!(mwis_exact(&g, &ws), Err(ExactError::TooLarge(41)));
    }

    #[test]
    fn tree_path_classes() {
        let g = build_graph(3, [(0, 1), (1, 2)]).unwrap();
        for root in 0..3 {
            let r = tree_mwis_classify(&g, root, &w(&[1.0, 3.0, 1.0])).unwrap();
            assert_eq!(
                r.classification.unwrap(),
                vec![Membership::InNone, Membership::InEvery, Membership::InNone]
            );
            assert_eq!(r.set, vec![1]);
            assert_eq!(r.weight, 3.0);
        }
    }

    #[test]
    fn tree_edge_tie() {
        let g = build_graph(2, [(0, 1)]).unwrap();
        let r = tree_mwis_classify(&g, 0, &w(&[1.0, 1.0])).unwrap();
        assert_eq!(
            r.classification.unwrap(),
            vec![Membership::InSome, Membership::InSome]
        );
        assert_eq!(r.weight, 1.0);
    }

    #[test]
    fn tree_single_node() {
        let g = Graph::edgeless(1);
        let r = tree_mwis_classify(&g, 0, &w(&[0.5])).unwrap();
        assert_eq!(r.classification.unwrap(), vec![Membership::InEvery]);
        assert_eq!(r.set, vec![0]);
    }

    #[test]
    fn tree_rejects_cycles() {
        let g = build_graph(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(matches!(
            tree_mwis_classify(&g, 0, &w(&[1.0; 3])),
            Err(ExactError::Graph(GraphError::NotATree))
        ));
    }
}
