//! Immutable sparse undirected graphs with directed-edge (arc) indexing.
//!
//! Undirected edge `k = (u, v)` with `u < v` owns the two arcs `2k` (`u -> v`)
//! and `2k + 1` (`v -> u`), so the reverse of arc `a` is `a ^ 1`. Adjacency is
//! stored in compressed sparse row form with sorted neighbor lists; next to each
//! neighbor entry we keep the id of the arc pointing *into* the node, which is
//! exactly what a message sweep reads.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("graph is not a tree")]
    NotATree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Canonical undirected edges, `u < v`, sorted.
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    /// `incoming[p]` is the arc `neighbors[p] -> node` for the node owning slot `p`.
    incoming: Vec<usize>,
}

/// Builds a graph from an edge list. Pairs may be given in either orientation;
/// they are canonicalized to `u < v` and sorted, so the edge index depends only
/// on the edge set.
pub fn build_graph<I>(n: usize, edges: I) -> Result<Graph, GraphError>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let mut canon = Vec::new();
    for (u, v) in edges {
        for node in [u, v] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        canon.push((u.min(v), u.max(v)));
    }
    canon.sort_unstable();
    if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
        return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
    }
    Ok(Graph::from_canonical(n, canon))
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn edgeless(n: usize) -> Self {
        Self::from_canonical(n, Vec::new())
    }

    fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0; 2 * edges.len()];
        let mut incoming = vec![0; 2 * edges.len()];
        // Edges are sorted by (u, v): for node x every edge (u, x) with u < x
        // precedes every edge (x, v), so filling in edge order keeps each
        // neighbor list sorted.
        for (k, &(u, v)) in edges.iter().enumerate() {
            neighbors[fill[u]] = v;
            incoming[fill[u]] = 2 * k + 1;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            incoming[fill[v]] = 2 * k;
            fill[v] += 1;
        }
        debug_assert!((0..n).all(|i| {
            neighbors[offsets[i]..offsets[i + 1]]
                .windows(2)
                .all(|w| w[0] < w[1])
        }));
        Self {
            n,
            edges,
            offsets,
            neighbors,
            incoming,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn arc_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Sorted neighbors of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Arcs `k -> i` for each `k` in `neighbors(i)`, in the same order.
    pub fn incoming_arcs(&self, i: usize) -> &[usize] {
        &self.incoming[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Source and target of an arc.
    pub fn arc(&self, a: usize) -> (usize, usize) {
        let (u, v) = self.edges[a / 2];
        if a.is_multiple_of(2) {
            (u, v)
        } else {
            (v, u)
        }
    }

    pub fn reverse_arc(a: usize) -> usize {
        a ^ 1
    }

    /// The arc `i -> j`, if `(i, j)` is an edge.
    pub fn arc_index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n {
            return None;
        }
        let pos = self.neighbors(i).binary_search(&j).ok()?;
        // incoming holds j -> i; flip it.
        Some(self.incoming_arcs(i)[pos] ^ 1)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.arc_index(i, j).is_some()
    }

    pub(crate) fn check_node(&self, i: usize) -> Result<(), GraphError> {
        if i < self.n {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange { node: i, n: self.n })
        }
    }

    /// True when no two nodes of `set` are adjacent. Nodes out of range are
    /// reported as not independent.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut member = vec![false; self.n];
        for &i in set {
            if i >= self.n {
                return false;
            }
            member[i] = true;
        }
        self.edges.iter().all(|&(u, v)| !(member[u] && member[v]))
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    pub fn is_tree(&self) -> bool {
        self.n > 0 && self.edges.len() == self.n - 1 && self.is_connected()
    }

    /// BFS layout of a tree rooted at `root`.
    pub fn root_at(&self, root: usize) -> Result<RootedTree, GraphError> {
        self.check_node(root)?;
        if !self.is_tree() {
            return Err(GraphError::NotATree);
        }
        let mut parent = vec![usize::MAX; self.n];
        let mut depth = vec![0u32; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut seen = vec![false; self.n];
        seen[root] = true;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    depth[v] = depth[u] + 1;
                    order.push(v);
                }
            }
        }
        Ok(RootedTree {
            root,
            order,
            parent,
            depth,
        })
    }
}

/// A tree graph laid out in BFS order from a chosen root.
#[derive(Debug, Clone)]
pub struct RootedTree {
    pub root: usize,
    /// Nodes in BFS order; `order[0] == root`.
    pub order: Vec<usize>,
    /// Parent of each node, `usize::MAX` for the root.
    pub parent: Vec<usize>,
    pub depth: Vec<u32>,
}

impl RootedTree {
    pub fn is_root(&self, i: usize) -> bool {
        i == self.root
    }

    pub fn height(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let g = build_graph(1, []).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert!(g.is_tree());
    }

    #[test]
    fn path_degrees() {
        let g = build_graph(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            build_graph(2, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(build_graph(2, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            build_graph(2, [(0, 2)]),
            Err(GraphError::NodeOutOfRange { node: 2, n: 2 })
        );
    }

    #[test]
    fn arcs_round_trip() {
        let g = build_graph(5, [(3, 1), (0, 4), (1, 2), (0, 1), (2, 4)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 4), (1, 2), (1, 3), (2, 4)]);
        for a in 0..g.arc_count() {
            let (s, t) = g.arc(a);
            assert_eq!(g.arc_index(s, t), Some(a));
            assert_eq!(g.arc(Graph::reverse_arc(a)), (t, s));
        }
        for i in 0..5 {
            for (&k, &a) in g.neighbors(i).iter().zip(g.incoming_arcs(i)) {
                assert_eq!(g.arc(a), (k, i));
                assert!(g.neighbors(k).contains(&i));
            }
        }
        assert_eq!(g.arc_index(0, 2), None);
    }

    #[test]
    fn independence() {
        let g = build_graph(3, [(0, 1), (1, 2)]).unwrap();
        assert!(g.is_independent(&[0, 2]));
        assert!(!g.is_independent(&[0, 1]));
        assert!(g.is_independent(&[]));
    }

    #[test]
    fn rooting() {
        let g = build_graph(4, [(0, 1), (1, 2), (1, 3)]).unwrap();
        let t = g.root_at(1).unwrap();
        assert_eq!(t.order, vec![1, 0, 2, 3]);
        assert_eq!(t.parent[2], 1);
        assert_eq!(t.height(), 1);
        let cyc = build_graph(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(cyc.root_at(0).unwrap_err(), GraphError::NotATree);
    }
}
