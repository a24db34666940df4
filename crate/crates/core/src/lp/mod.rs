//! The edge-based LP relaxation of MWIS,
//!
//! ```text
//! maximize  sum_i w_i x_i
//! subject to x_i + x_j <= 1 for every edge (i, j),  0 <= x_i <= 1,
//! ```
//!
//! solved exactly through its half-integrality: every optimum value is
//! attained at a point of {0, 1/2, 1}^n.
//!
//! [`solve_edge_lp`] works on the bipartite double cover. Each node `i` gets a
//! left copy `i'` and a right copy `i''`, both of weight `w_i`, and each edge
//! `(i, j)` becomes `(i', j'')` and `(j', i'')`. A maximum-weight independent
//! set `Y` of the cover is the complement of a minimum-weight vertex cover,
//! which is a minimum s-t cut of the network `s -> i'` (capacity `w_i`),
//! `i' -> j''` (unbounded), `j'' -> t` (capacity `w_j`). Setting
//! `x_i = (y_i' + y_i'') / 2` gives an LP optimum whose value is half the
//! cover's optimum.
//!
//! Weights are handled through [`ScaledWeights`], so the flow, the cut and the
//! doubled objective are exact integers.

mod flow;

use thiserror::Error;

use crate::graph::Graph;
use crate::half::Half;
use crate::weights::{NodeWeights, ScaledWeights, WeightError};

use flow::FlowNetwork;

/// Largest graph [`enumerate_lp_optima`] accepts.
pub const MAX_ENUMERATION_NODES: usize = 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("enumeration is limited to {MAX_ENUMERATION_NODES} nodes, graph has {0}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Half>,
    /// `sum_i w_i x_i`, rounded once from the exact value.
    pub objective: f64,
    /// `2 * sum_i w_i x_i` in the units of the instance's [`ScaledWeights`].
    pub doubled_objective: i128,
    pub fractional_nodes: Vec<usize>,
}

impl LpSolution {
    fn from_point(x: Vec<Half>, scaled: &ScaledWeights) -> Self {
        let doubled_objective = doubled_value(&x, scaled.as_slice());
        let fractional_nodes = (0..x.len()).filter(|&i| !x[i].is_integral()).collect();
        Self {
            x,
            objective: scaled.to_f64(doubled_objective) / 2.0,
            doubled_objective,
            fractional_nodes,
        }
    }

    pub fn integral_fraction(&self) -> f64 {
        if self.x.is_empty() {
            return 1.0;
        }
        1.0 - self.fractional_nodes.len() as f64 / self.x.len() as f64
    }

    pub fn is_feasible(&self, g: &Graph) -> bool {
        is_feasible(g, &self.x)
    }
}

pub fn is_feasible(g: &Graph, x: &[Half]) -> bool {
    x.len() == g.node_count()
        && g.edges()
            .iter()
            .all(|&(u, v)| x[u].doubled() + x[v].doubled() <= 2)
}

fn doubled_value(x: &[Half], scaled: &[i128]) -> i128 {
    x.iter()
        .zip(scaled)
        .map(|(xi, &wi)| i128::from(xi.doubled()) * wi)
        .sum()
}

/// `sum_i w_i x_i`, accumulated exactly on the doubled values and halved.
pub fn lp_value(x: &[Half], w: &NodeWeights) -> Result<f64, LpError> {
    let scaled = ScaledWeights::new(w)?;
    Ok(scaled.to_f64(doubled_value(x, scaled.as_slice())) / 2.0)
}

/// An optimal half-integral solution of the edge LP.
pub fn solve_edge_lp(g: &Graph, w: &NodeWeights) -> Result<LpSolution, LpError> {
    check_len(g, w)?;
    let scaled = ScaledWeights::new(w)?;
    let (x, doubled) = solve_scaled(g, scaled.as_slice());
    let sol = LpSolution::from_point(x, &scaled);
    debug_assert_eq!(sol.doubled_objective, doubled);
    Ok(sol)
}

fn check_len(g: &Graph, w: &NodeWeights) -> Result<(), LpError> {
    if w.len() != g.node_count() {
        return Err(WeightError::LengthMismatch {
            expected: g.node_count(),
            got: w.len(),
        }
        .into());
    }
    Ok(())
}

/// Double-cover solve on integer weights. Returns the point and its doubled
/// objective.
pub(crate) fn solve_scaled(g: &Graph, w: &[i128]) -> (Vec<Half>, i128) {
    let n = g.node_count();
    let (s, t) = (0, 1);
    let left = |i: usize| 2 + i;
    let right = |i: usize| 2 + n + i;
    let unbounded = i128::MAX >> 4;

    let mut net = FlowNetwork::new(2 * n + 2);
    for (i, &wi) in w.iter().enumerate() {
        net.add_arc(s, left(i), wi);
    }
    for &(u, v) in g.edges() {
        net.add_arc(left(u), right(v), unbounded);
        net.add_arc(left(v), right(u), unbounded);
    }
    for (i, &wi) in w.iter().enumerate() {
        net.add_arc(right(i), t, wi);
    }
    let cut = net.max_flow(s, t);
    let reach = net.source_side(s);

    // The cover is {i' unreachable} + {i'' reachable}; the independent set
    // is its complement.
    let x: Vec<Half> = (0..n)
        .map(|i| {
            let d = u8::from(reach[left(i)]) + u8::from(!reach[right(i)]);
            Half::from_doubled(d).expect("two copies")
        })
        .collect();
    let total: i128 = w.iter().sum();
    let doubled = 2 * total - cut;
    debug_assert_eq!(doubled, doubled_value(&x, w));
    (x, doubled)
}

/// Every point of {0, 1/2, 1}^n that is feasible and attains the LP optimum,
/// in lexicographic order of `x`. Intended as an oracle on small graphs.
pub fn enumerate_lp_optima(g: &Graph, w: &NodeWeights) -> Result<Vec<LpSolution>, LpError> {
    let n = g.node_count();
    if n > MAX_ENUMERATION_NODES {
        return Err(LpError::TooLarge(n));
    }
    check_len(g, w)?;
    let scaled = ScaledWeights::new(w)?;
    let ws = scaled.as_slice();
    // suffix[i] = 2 * sum_{k >= i} w_k, the most nodes i.. can still add.
    let mut suffix = vec![0i128; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + 2 * ws[i];
    }
    let mut search = Enumeration {
        g,
        w: ws,
        suffix,
        x: vec![0u8; n],
        best: i128::MIN,
        found: Vec::new(),
    };
    search.visit(0, 0);
    let mut points = search.found;
    points.sort();
    Ok(points
        .into_iter()
        .map(|d| {
            let x = d
                .into_iter()
                .map(|v| Half::from_doubled(v).unwrap())
                .collect();
            LpSolution::from_point(x, &scaled)
        })
        .collect())
}

struct Enumeration<'a> {
    g: &'a Graph,
    w: &'a [i128],
    suffix: Vec<i128>,
    x: Vec<u8>,
    best: i128,
    found: Vec<Vec<u8>>,
}

impl Enumeration<'_> {
    fn visit(&mut self, i: usize, value: i128) {
        if value + self.suffix[i] < self.best {
            return;
        }
        if i == self.x.len() {
            if value > self.best {
                self.best = value;
                self.found.clear();
            }
            self.found.push(self.x.clone());
            return;
        }
        // Largest value allowed by already-assigned neighbors.
        let cap = self
            .g
            .neighbors(i)
            .iter()
            .take_while(|&&k| k < i)
            .map(|&k| 2 - self.x[k])
            .min()
            .unwrap_or(2);
        for d in (0..=cap).rev() {
            self.x[i] = d;
            self.visit(i + 1, value + i128::from(d) * self.w[i]);
        }
        self.x[i] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn halves(d: &[u8]) -> Vec<Half> {
        d.iter().map(|&v| Half::from_doubled(v).unwrap()).collect()
    }

    fn w(v: &[f64]) -> NodeWeights {
        NodeWeights::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_edge() {
        let g = build_graph(2, [(0, 1)]).unwrap();
        let sol = solve_edge_lp(&g, &w(&[3.0, 1.0])).unwrap();
        assert_eq!(sol.x, halves(&[2, 0]));
        assert_eq!(sol.objective, 3.0);
        let all = enumerate_lp_optima(&g, &w(&[3.0, 1.0])).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].x, halves(&[2, 0]));
    }

    #[test]
    fn triangle_is_half() {
        let g = build_graph(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let ws = w(&[1.0, 1.0, 1.0]);
        let sol = solve_edge_lp(&g, &ws).unwrap();
        assert_eq!(sol.x, halves(&[1, 1, 1]));
        assert_eq!(sol.objective, 1.5);
        assert_eq!(sol.fractional_nodes, vec![0, 1, 2]);
        assert_eq!(lp_value(&sol.x, &ws).unwrap(), 1.5);
        let all = enumerate_lp_optima(&g, &ws).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].x, halves(&[1, 1, 1]));
    }

    #[test]
    fn isolated_node_takes_box_bound() {
        let g = Graph::edgeless(1);
        let sol = solve_edge_lp(&g, &w(&[5.0])).unwrap();
        assert_eq!(sol.x, vec![Half::ONE]);
        assert_eq!(sol.objective, 5.0);
        assert_eq!(lp_value(&sol.x, &w(&[5.0])).unwrap(), 5.0);
    }

    #[test]
    fn four_cycle_optima() {
        let g = build_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let all = enumerate_lp_optima(&g, &w(&[1.0; 4])).unwrap();
        let xs: Vec<Vec<Half>> = all.iter().map(|s| s.x.clone()).collect();
        assert_eq!(
            xs,
            vec![
                halves(&[0, 2, 0, 2]),
                halves(&[1, 1, 1, 1]),
                halves(&[2, 0, 2, 0])
            ]
        );
        assert!(all.iter().all(|s| s.objective == 2.0));
    }

    #[test]
    fn zero_point_value() {
        assert_eq!(lp_value(&halves(&[0, 0]), &w(&[1.0, 2.0])).unwrap(), 0.0);
    }

    #[test]
    fn enumeration_limit() {
        let g = Graph::edgeless(15);
        assert_eq!(
            enumerate_lp_optima(&g, &NodeWeights::uniform(15, 1.0).unwrap()),
            Err(LpError::TooLarge(15))
        );
    }

    #[test]
    fn weight_length_checked() {
        let g = Graph::edgeless(2);
        assert!(solve_edge_lp(&g, &w(&[1.0])).is_err());
    }

    #[test]
    fn odd_cycle_beside_edge() {
        let g = build_graph(5, [(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        let sol = solve_edge_lp(&g, &w(&[1.0, 1.0, 1.0, 2.0, 1.0])).unwrap();
        assert_eq!(sol.x, halves(&[1, 1, 1, 2, 0]));
        assert_eq!(sol.objective, 3.5);
        assert_eq!(sol.integral_fraction(), 0.4);
    }
}
