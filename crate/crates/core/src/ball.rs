//! Depth-limited neighborhoods `G_i(t)`.

use std::collections::HashMap;

use crate::graph::{Graph, GraphError};

/// The subgraph induced by all nodes within graph distance `depth` of `center`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub center: usize,
    pub depth: u32,
    /// Sorted node ids.
    pub nodes: Vec<usize>,
    /// Induced edges, canonical `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub is_tree: bool,
}

impl Ball {
    pub fn contains(&self, i: usize) -> bool {
        self.nodes.binary_search(&i).is_ok()
    }
}

/// BFS ball of radius `depth` around `center`.
pub fn ball(g: &Graph, center: usize, depth: u32) -> Result<Ball, GraphError> {
    g.check_node(center)?;
    let dist = distances_within(g, center, depth);
    let mut nodes: Vec<usize> = dist.keys().copied().collect();
    nodes.sort_unstable();
    let mut edges = Vec::new();
    for &u in &nodes {
        for &v in g.neighbors(u) {
            if u < v && dist.contains_key(&v) {
                edges.push((u, v));
            }
        }
    }
    // BFS output is connected, so the edge count alone decides acyclicity.
    let is_tree = edges.len() + 1 == nodes.len();
    Ok(Ball {
        center,
        depth,
        nodes,
        edges,
        is_tree,
    })
}

/// Whether the ball of radius `depth` around `center` is a tree, without
/// materializing the edge list.
pub fn ball_is_tree(g: &Graph, center: usize, depth: u32) -> Result<bool, GraphError> {
    g.check_node(center)?;
    let dist = distances_within(g, center, depth);
    let twice_edges: usize = dist
        .keys()
        .map(|&u| {
            g.neighbors(u)
                .iter()
                .filter(|v| dist.contains_key(v))
                .count()
        })
        .sum();
    Ok(twice_edges / 2 + 1 == dist.len())
}

fn distances_within(g: &Graph, center: usize, depth: u32) -> HashMap<usize, u32> {
    let mut dist = HashMap::from([(center, 0u32)]);
    let mut frontier = vec![center];
    for d in 1..=depth {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in g.neighbors(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(d);
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    dist
}
