use std::collections::VecDeque;

use super::TriState;

/// Bonuses and estimates of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: u32,
    pub bonus: Vec<f64>,
    pub estimate: Vec<TriState>,
}

/// How much history a run keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    /// Every iteration.
    Full,
    /// Only the most recent `k` iterations (`k >= 2`).
    Window(usize),
}

#[derive(Debug, Clone)]
pub struct Trace {
    snapshots: VecDeque<Snapshot>,
    mode: TraceMode,
}

impl Trace {
    pub fn new(mode: TraceMode) -> Self {
        if let TraceMode::Window(k) = mode {
            assert!(k >= 2, "window must hold at least two iterations");
        }
        Self {
            snapshots: VecDeque::new(),
            mode,
        }
    }

    pub fn push(&mut self, snap: Snapshot) {
        debug_assert!(self.snapshots.back().is_none_or(|s| s.t + 1 == snap.t));
        self.snapshots.push_back(snap);
        if let TraceMode::Window(k) = self.mode {
            while self.snapshots.len() > k {
                self.snapshots.pop_front();
            }
        }
    }

    pub fn get(&self, t: u32) -> Option<&Snapshot> {
        let first = self.snapshots.front()?.t;
        if t < first {
            return None;
        }
        self.snapshots.get((t - first) as usize)
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.back()
    }

    pub fn first_t(&self) -> Option<u32> {
        self.snapshots.front().map(|s| s.t)
    }

    pub fn last_t(&self) -> Option<u32> {
        self.snapshots.back().map(|s| s.t)
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Snapshot> {
        self.snapshots.iter()
    }

    /// Estimate of node `i` at time `t`.
    pub fn estimate(&self, t: u32, i: usize) -> Option<TriState> {
        self.get(t).map(|s| s.estimate[i])
    }

    /// The estimate history of one node over the retained iterations.
    pub fn node_history(&self, i: usize) -> Vec<TriState> {
        self.snapshots.iter().map(|s| s.estimate[i]).collect()
    }
}

/// What a node's estimate did over the tail of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeBehavior {
    /// Constant `Zero` or `One`.
    Converged(TriState),
    /// Constant `Unknown`.
    StuckUnknown,
    /// Period two and not constant, e.g. `1 0 1 0`.
    Oscillating,
    Unsettled,
}

/// Classifies every node by its estimates over the last `window` retained
/// iterations (fewer if the trace is shorter).
pub fn classify_tail(trace: &Trace, window: usize) -> Vec<NodeBehavior> {
    let Some(last) = trace.last() else {
        return Vec::new();
    };
    let len = window.min(trace.len()).max(1);
    let tail: Vec<&Snapshot> = trace.iter().skip(trace.len() - len).collect();
    (0..last.estimate.len())
        .map(|i| {
            let xs: Vec<TriState> = tail.iter().map(|s| s.estimate[i]).collect();
            if xs.iter().all(|&x| x == xs[0]) {
                match xs[0] {
                    TriState::Unknown => NodeBehavior::StuckUnknown,
                    x => NodeBehavior::Converged(x),
                }
            } else if xs.len() >= 3 && xs.iter().enumerate().all(|(k, &x)| x == xs[k % 2]) {
                NodeBehavior::Oscillating
            } else {
                NodeBehavior::Unsettled
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(t: u32, xs: &[TriState]) -> Snapshot {
        Snapshot {
            t,
            bonus: vec![0.0; xs.len()],
            estimate: xs.to_vec(),
        }
    }

    #[test]
    fn window_keeps_tail() {
        let mut tr = Trace::new(TraceMode::Window(2));
        for t in 1..=5 {
            tr.push(snap(t, &[TriState::One]));
        }
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.first_t(), Some(4));
        assert!(tr.get(3).is_none());
        assert!(tr.get(5).is_some());
        assert!(tr.get(6).is_none());
    }

    #[test]
    fn tail_classes() {
        use TriState::*;
        let rows = [
            [One, Zero, Unknown, One],
            [One, One, Unknown, Zero],
            [One, Zero, Unknown, Zero],
            [One, One, Unknown, Zero],
        ];
        let mut tr = Trace::new(TraceMode::Full);
        for (t, r) in rows.iter().enumerate() {
            tr.push(snap(t as u32 + 1, r));
        }
        assert_eq!(
            classify_tail(&tr, 4),
            vec![
                NodeBehavior::Converged(One),
                NodeBehavior::Oscillating,
                NodeBehavior::StuckUnknown,
                NodeBehavior::Unsettled,
            ]
        );
    }
}
