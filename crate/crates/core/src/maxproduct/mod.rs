//! Max-product belief propagation for MWIS.
//!
//! Messages live on arcs. Starting from all-zero messages at `t = 1`, every
//! iteration recomputes all of them from the previous snapshot (flooding
//! schedule):
//!
//! ```text
//! gamma[t](i -> j) = max(0, w_i - sum over k in N(i) \ {j} of gamma[t-1](k -> i))
//! ```
//!
//! and each node reads its estimate off the bonus
//! `B_i = w_i - sum over k in N(i) of gamma[t](k -> i)`: `One` when the bonus
//! is positive, `Zero` when negative, `Unknown` when it is zero (within a
//! tolerance).
//!
//! The odd/even structure of the estimates is only meaningful for this
//! synchronous schedule, so no other schedule is offered.

mod boundary;
mod trace;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::half::Half;
use crate::weights::NodeWeights;

pub use boundary::{mp_run_tree_boundary, BoundaryCondition};
pub use trace::{classify_tail, NodeBehavior, Snapshot, Trace, TraceMode};

/// Default sign tolerance for bonuses.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Below this many arcs a step is always computed sequentially.
const PARALLEL_MIN_ARCS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaxProductError {
    #[error("stable set needs t >= 2, got t = {0}")]
    TooEarly(u32),
    #[error("iteration {0} is not in the trace")]
    MissingIteration(u32),
    #[error("stable set is not independent: edge ({0}, {1}) has both endpoints")]
    NotIndependent(usize, usize),
    #[error("message vector has {got} entries, graph has {expected} arcs")]
    WrongLength { expected: usize, got: usize },
    #[error("message {value} on arc {arc} is not a finite non-negative number")]
    InvalidMessage { arc: usize, value: f64 },
    #[error("invalid boundary condition: {0}")]
    InvalidBoundary(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// Per-node max-product estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TriState {
    Zero,
    One,
    Unknown,
}

impl TriState {
    pub fn from_bonus(bonus: f64, tolerance: f64) -> TriState {
        if bonus > tolerance {
            TriState::One
        } else if bonus < -tolerance {
            TriState::Zero
        } else {
            TriState::Unknown
        }
    }

    pub fn symbol(self) -> char {
        match self {
            TriState::Zero => '0',
            TriState::One => '1',
            TriState::Unknown => '?',
        }
    }
}

/// Double-buffered messages, indexed by arc id.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    prev: Vec<f64>,
    cur: Vec<f64>,
    t: u32,
}

impl MessageState {
    /// The all-zero state at `t = 1`.
    pub fn new(g: &Graph) -> Self {
        Self {
            prev: vec![0.0; g.arc_count()],
            cur: vec![0.0; g.arc_count()],
            t: 1,
        }
    }

    /// A state holding arbitrary non-negative messages at time `t`.
    pub fn from_messages(g: &Graph, messages: Vec<f64>, t: u32) -> Result<Self, MaxProductError> {
        if messages.len() != g.arc_count() {
            return Err(MaxProductError::WrongLength {
                expected: g.arc_count(),
                got: messages.len(),
            });
        }
        if let Some((arc, &value)) = messages
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m >= 0.0))
        {
            return Err(MaxProductError::InvalidMessage { arc, value });
        }
        Ok(Self {
            prev: messages.clone(),
            cur: messages,
            t,
        })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// Messages at time `t`.
    pub fn messages(&self) -> &[f64] {
        &self.cur
    }

    /// Messages at time `t - 1` (equal to the current ones for a fresh state).
    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    /// The message `i -> j`, if `(i, j)` is an edge.
    pub fn message(&self, g: &Graph, i: usize, j: usize) -> Option<f64> {
        g.arc_index(i, j).map(|a| self.cur[a])
    }

    /// One synchronous update in place: the current buffer becomes the previous
    /// one and is overwritten with the new messages.
    pub fn advance(&mut self, g: &Graph, w: &NodeWeights, parallel: bool) {
        std::mem::swap(&mut self.prev, &mut self.cur);
        update_messages(g, w, &self.prev, &mut self.cur, parallel);
        self.t += 1;
    }

    /// `max |gamma[t] - gamma[t-1]|` over arcs.
    pub fn last_change(&self) -> f64 {
        max_abs_diff(&self.cur, &self.prev)
    }
}

/// Computes the messages of the next iteration from `incoming` into `out`.
///
/// Every output entry is a function of `incoming` alone, summed in
/// neighbor order, so the result does not depend on `parallel`.
pub fn update_messages(
    g: &Graph,
    w: &NodeWeights,
    incoming: &[f64],
    out: &mut [f64],
    parallel: bool,
) {
    debug_assert_eq!(incoming.len(), g.arc_count());
    debug_assert_eq!(out.len(), g.arc_count());
    let compute = |(a, slot): (usize, &mut f64)| {
        let (i, j) = g.arc(a);
        let mut sum = 0.0;
        for (&k, &arc) in g.neighbors(i).iter().zip(g.incoming_arcs(i)) {
            if k != j {
                sum += incoming[arc];
            }
        }
        *slot = (w[i] - sum).max(0.0);
    };
    if parallel && out.len() >= PARALLEL_MIN_ARCS {
        out.par_iter_mut().enumerate().for_each(compute);
    } else {
        out.iter_mut().enumerate().for_each(compute);
    }
}

/// One max-product iteration; returns the state at `t + 1`.
pub fn mp_step(g: &Graph, w: &NodeWeights, s: &MessageState) -> MessageState {
    let mut next = s.clone();
    next.advance(g, w, false);
    next
}

/// Bonus of every node under the given messages.
pub fn bonuses(g: &Graph, w: &NodeWeights, messages: &[f64]) -> Vec<f64> {
    (0..g.node_count())
        .map(|i| {
            let incoming: f64 = g.incoming_arcs(i).iter().map(|&a| messages[a]).sum();
            w[i] - incoming
        })
        .collect()
}

/// Bonuses and the estimates they induce.
pub fn bonus_and_estimate(
    g: &Graph,
    w: &NodeWeights,
    s: &MessageState,
    tolerance: f64,
) -> (Vec<f64>, Vec<TriState>) {
    let b = bonuses(g, w, s.messages());
    let x = b
        .iter()
        .map(|&bi| TriState::from_bonus(bi, tolerance))
        .collect();
    (b, x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpConfig {
    pub iterations: u32,
    pub tolerance: f64,
    pub parallel: bool,
    pub trace: TraceMode,
}

impl MpConfig {
    pub fn new(iterations: u32) -> Self {
        Self {
            iterations,
            tolerance: DEFAULT_TOLERANCE,
            parallel: false,
            trace: TraceMode::Full,
        }
    }

    pub fn tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn trace(mut self, mode: TraceMode) -> Self {
        self.trace = mode;
        self
    }
}

#[derive(Debug, Clone)]
pub struct MpRun {
    pub trace: Trace,
    /// Messages at `t = iterations`.
    pub state: MessageState,
    /// First `t` whose messages equal those of `t - 1`, if reached.
    pub fixed_point_at: Option<u32>,
}

/// Runs `iterations` iterations (`t = 1 ..= iterations`) and records every
/// estimate.
pub fn mp_run(g: &Graph, w: &NodeWeights, iterations: u32, tolerance: f64) -> MpRun {
    mp_run_with(g, w, &MpConfig::new(iterations).tolerance(tolerance))
}

pub fn mp_run_with(g: &Graph, w: &NodeWeights, cfg: &MpConfig) -> MpRun {
    assert!(
        cfg.iterations >= 1,
        "max-product needs at least one iteration"
    );
    let mut state = MessageState::new(g);
    let mut trace = Trace::new(cfg.trace);
    trace.push(snapshot(g, w, &state, cfg.tolerance));
    let mut fixed_point_at = None;
    for t in 2..=cfg.iterations {
        if fixed_point_at.is_some() {
            // Messages no longer move; every later iteration repeats.
            let mut snap = trace.last().expect("trace is never empty").clone();
            snap.t = t;
            trace.push(snap);
            continue;
        }
        state.advance(g, w, cfg.parallel);
        if state.messages() == state.previous() {
            fixed_point_at = Some(t);
        }
        trace.push(snapshot(g, w, &state, cfg.tolerance));
    }
    state.t = cfg.iterations;
    MpRun {
        trace,
        state,
        fixed_point_at,
    }
}

fn snapshot(g: &Graph, w: &NodeWeights, s: &MessageState, tolerance: f64) -> Snapshot {
    let (bonus, estimate) = bonus_and_estimate(g, w, s, tolerance);
    Snapshot {
        t: s.t(),
        bonus,
        estimate,
    }
}

/// Nodes estimated `One` at both `t - 1` and `t`. The result is checked for
/// independence; a violation means the engine is broken.
pub fn extract_stable_set(g: &Graph, trace: &Trace, t: u32) -> Result<Vec<usize>, MaxProductError> {
    if t < 2 {
        return Err(MaxProductError::TooEarly(t));
    }
    let before = trace
        .get(t - 1)
        .ok_or(MaxProductError::MissingIteration(t - 1))?;
    let now = trace.get(t).ok_or(MaxProductError::MissingIteration(t))?;
    let set: Vec<usize> = (0..g.node_count())
        .filter(|&i| before.estimate[i] == TriState::One && now.estimate[i] == TriState::One)
        .collect();
    let mut member = vec![false; g.node_count()];
    for &i in &set {
        member[i] = true;
    }
    if let Some(&(u, v)) = g.edges().iter().find(|&&(u, v)| member[u] && member[v]) {
        return Err(MaxProductError::NotIndependent(u, v));
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointCheck {
    /// `max |gamma - update(gamma)|` over arcs.
    pub residual: f64,
    /// `1/2` where the estimate is `Unknown`, the estimate otherwise.
    pub lp_point: Vec<Half>,
    /// Whether `lp_point` satisfies every edge and box constraint.
    pub feasible: bool,
}

/// How far the current messages are from a fixed point, and the LP point the
/// current estimates describe.
pub fn check_fixed_point(
    g: &Graph,
    w: &NodeWeights,
    s: &MessageState,
    tolerance: f64,
) -> FixedPointCheck {
    let mut updated = vec![0.0; g.arc_count()];
    update_messages(g, w, s.messages(), &mut updated, false);
    let residual = max_abs_diff(s.messages(), &updated);
    let (_, estimate) = bonus_and_estimate(g, w, s, tolerance);
    let lp_point: Vec<Half> = estimate
        .iter()
        .map(|x| match x {
            TriState::Zero => Half::ZERO,
            TriState::One => Half::ONE,
            TriState::Unknown => Half::HALF,
        })
        .collect();
    let feasible = g
        .edges()
        .iter()
        .all(|&(u, v)| lp_point[u].doubled() + lp_point[v].doubled() <= 2);
    FixedPointCheck {
        residual,
        lp_point,
        feasible,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
