//! Seeded random graph models, exponential weights and the limiting trees.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Graph structure is drawn from stream
//! [`STRUCTURE_STREAM`] and weights from [`WEIGHT_STREAM`] of the same seed, so
//! weights are independent of the graph and both replay bit-exactly on any
//! platform.

use std::collections::HashSet;

use rand::distr::{Distribution, Open01};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, Graph};
use crate::weights::NodeWeights;

pub const STRUCTURE_STREAM: u64 = 0;
pub const WEIGHT_STREAM: u64 = 1;

/// Restart budget for the pairing model.
pub const DEFAULT_REJECTION_BUDGET: usize = 10_000;

/// Limit trees larger than this are refused.
pub const MAX_TREE_NODES: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no simple {r}-regular graph on {n} nodes (need n*r even and r < n)")]
    InfeasibleDegree { n: usize, r: usize },
    #[error("pairing model rejected {0} consecutive attempts")]
    RejectionBudgetExhausted(usize),
}

/// A random graph model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Ensemble {
    /// `G(n, c/n)`.
    ErdosRenyi { n: usize, c: f64 },
    /// Uniform simple `r`-regular graph on `n` nodes.
    RandomRegular { n: usize, r: usize },
    /// Galton-Watson tree with Poisson(`c`) offspring, cut at `depth`.
    PoissonTree { c: f64, depth: u32 },
    /// Root has `r` children, every other internal node `r - 1`.
    RegularTree { r: usize, depth: u32 },
}

impl Ensemble {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        match *self {
            Ensemble::ErdosRenyi { n, c } => check_er(n, c),
            Ensemble::RandomRegular { n, r } => check_regular(n, r),
            Ensemble::PoissonTree { c, .. } => check_positive("c", c),
            Ensemble::RegularTree { r, .. } => {
                if r == 0 {
                    Err(EnsembleError::InvalidParameter("r must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn is_tree_model(&self) -> bool {
        matches!(
            self,
            Ensemble::PoissonTree { .. } | Ensemble::RegularTree { .. }
        )
    }

    pub fn with_seed(self, seed: u64) -> EnsembleSpec {
        EnsembleSpec {
            ensemble: self,
            seed,
        }
    }
}

/// A model together with the seed that pins down one sample of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub ensemble: Ensemble,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn graph(&self) -> Result<Graph, EnsembleError> {
        match self.ensemble {
            Ensemble::ErdosRenyi { n, c } => gen_erdos_renyi(n, c, self.seed),
            Ensemble::RandomRegular { n, r } => gen_random_regular(n, r, self.seed),
            Ensemble::PoissonTree { c, depth } => gen_poisson_tree(c, depth, self.seed),
            Ensemble::RegularTree { r, depth } => gen_regular_tree(r, depth),
        }
    }

    /// Graph plus Exp(1) weights drawn from the weight stream of the same seed.
    pub fn instance(&self) -> Result<(Graph, NodeWeights), EnsembleError> {
        let g = self.graph()?;
        let w = sample_exp_weights(g.node_count(), self.seed);
        Ok((g, w))
    }
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_positive(name: &str, x: f64) -> Result<(), EnsembleError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(EnsembleError::InvalidParameter(format!(
            "{name} must be positive, got {x}"
        )))
    }
}

fn check_er(n: usize, c: f64) -> Result<(), EnsembleError> {
    if n == 0 {
        return Err(EnsembleError::InvalidParameter("n must be >= 1".into()));
    }
    check_positive("c", c)?;
    if c >= n as f64 {
        return Err(EnsembleError::InvalidParameter(format!(
            "c = {c} must be below n = {n}"
        )));
    }
    Ok(())
}

fn check_regular(n: usize, r: usize) -> Result<(), EnsembleError> {
    if r == 0 {
        return Err(EnsembleError::InvalidParameter("r must be >= 1".into()));
    }
    if r >= n || (n * r) % 2 == 1 {
        return Err(EnsembleError::InfeasibleDegree { n, r });
    }
    Ok(())
}

/// `G(n, c/n)` by geometric skipping over the pair sequence
/// `(0,1), (0,2), (1,2), (0,3), ...`: the gap to the next present pair is
/// `floor(ln(1 - U) / ln(1 - p))`, so the cost is proportional to the number of
/// edges.
pub fn gen_erdos_renyi(n: usize, c: f64, seed: u64) -> Result<Graph, EnsembleError> {
    check_er(n, c)?;
    let p = c / n as f64;
    let mut rng = rng_for(seed, STRUCTURE_STREAM);
    let log_q = (-p).ln_1p();
    let mut edges = Vec::new();
    // Current pair is (w, v) with w < v.
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let u: f64 = rng.random();
        let skip = ((-u).ln_1p() / log_q).floor();
        if skip >= (n as f64) * (n as f64) {
            break;
        }
        w += 1 + skip as i64;
        while v < n && w >= v as i64 {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    Ok(build_graph(n, edges).expect("skip sampler emits distinct in-range pairs"))
}

/// Uniform simple `r`-regular graph via the pairing (configuration) model,
/// restarting from scratch whenever a self-loop or multi-edge appears.
pub fn gen_random_regular(n: usize, r: usize, seed: u64) -> Result<Graph, EnsembleError> {
    gen_random_regular_counted(n, r, seed, DEFAULT_REJECTION_BUDGET).map(|(g, _)| g)
}

/// Like [`gen_random_regular`], also returning the number of attempts made
/// (1 means the first pairing was simple).
pub fn gen_random_regular_counted(
    n: usize,
    r: usize,
    seed: u64,
    budget: usize,
) -> Result<(Graph, usize), EnsembleError> {
    check_regular(n, r)?;
    let mut rng = rng_for(seed, STRUCTURE_STREAM);
    let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, r)).collect();
    let mut seen = HashSet::with_capacity(n * r / 2);
    let mut edges = Vec::with_capacity(n * r / 2);
    for attempt in 1..=budget {
        stubs.shuffle(&mut rng);
        seen.clear();
        edges.clear();
        let simple = stubs.chunks_exact(2).all(|pair| {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                return false;
            }
            edges.push((u, v));
            true
        });
        if simple {
            let g = build_graph(n, edges.iter().copied()).expect("simple pairing");
            return Ok((g, attempt));
        }
    }
    Err(EnsembleError::RejectionBudgetExhausted(budget))
}

/// I.i.d. Exp(1) weights by inversion, `-ln U` with `U` uniform on the open
/// interval (0, 1), which keeps every weight strictly positive.
pub fn sample_exp_weights(n: usize, seed: u64) -> NodeWeights {
    let mut rng = rng_for(seed, WEIGHT_STREAM);
    let values = (0..n)
        .map(|_| {
            let u: f64 = Open01.sample(&mut rng);
            -u.ln()
        })
        .collect();
    NodeWeights::new(values).expect("-ln U > 0 for U in (0, 1)")
}

/// Exp(1) samples from an arbitrary stream; used by Monte Carlo experiments
/// that need weights without a graph.
pub fn exp_samples(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = Open01.sample(rng);
            -u.ln()
        })
        .collect()
}

/// Poisson(`c`) Galton-Watson tree to the given depth. Node 0 is the root and
/// ids follow BFS order.
pub fn gen_poisson_tree(c: f64, depth: u32, seed: u64) -> Result<Graph, EnsembleError> {
    check_positive("c", c)?;
    let offspring = Poisson::new(c).map_err(|e| EnsembleError::InvalidParameter(e.to_string()))?;
    let mut rng = rng_for(seed, STRUCTURE_STREAM);
    grow_tree(depth, |_| offspring.sample(&mut rng) as usize)
}

/// Regular tree: root has `r` children, every deeper internal node `r - 1`.
pub fn gen_regular_tree(r: usize, depth: u32) -> Result<Graph, EnsembleError> {
    if r == 0 {
        return Err(EnsembleError::InvalidParameter("r must be >= 1".into()));
    }
    grow_tree(depth, |level| if level == 0 { r } else { r - 1 })
}

fn grow_tree(depth: u32, mut children: impl FnMut(u32) -> usize) -> Result<Graph, EnsembleError> {
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next_id = 1usize;
    for level in 0..depth {
        let mut next = Vec::new();
        for &parent in &frontier {
            let k = children(level);
            if next_id + k > MAX_TREE_NODES {
                return Err(EnsembleError::InvalidParameter(format!(
                    "tree exceeds {MAX_TREE_NODES} nodes"
                )));
            }
            for child in next_id..next_id + k {
                edges.push((parent, child));
                next.push(child);
            }
            next_id += k;
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(build_graph(next_id, edges).expect("tree edges are simple"))
}

pub fn gen_limit_tree(ensemble: &Ensemble, seed: u64) -> Result<Graph, EnsembleError> {
    match *ensemble {
        Ensemble::PoissonTree { c, depth } => gen_poisson_tree(c, depth, seed),
        Ensemble::RegularTree { r, depth } => gen_regular_tree(r, depth),
        _ => Err(EnsembleError::InvalidParameter(
            "not a limit-tree model".into(),
        )),
    }
}
