use rand::Rng;
use rayon::prelude::*;

use super::report::{RunReport, TrialRecord};
use super::{ExperimentConfig, Result};
use crate::ball::ball_is_tree;
use crate::ensembles::{gen_limit_tree, rng_for, sample_exp_weights, Ensemble};
use crate::exact::tree_mwis_classify;
use crate::graph::Graph;
use crate::half::Half;
use crate::lp::solve_edge_lp;
use crate::maxproduct::{
    classify_tail, extract_stable_set, mp_run_tree_boundary, mp_run_with, BoundaryCondition,
    MaxProductError, MpConfig, NodeBehavior, TraceMode, TriState,
};
use crate::weights::{NodeWeights, ScaledWeights};

/// Stream for the random boundary values, next to the structure and weight
/// streams of the same seed.
const BOUNDARY_STREAM: u64 = 2;

/// Length of the tail over which a node must be constant to count as
/// converged.
const CONVERGENCE_WINDOW: u32 = 4;

fn run_trials<F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<TrialRecord>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = cfg.trial_seed(trial);
            f(seed).map(|values| TrialRecord {
                trial,
                seed,
                values,
            })
        })
        .collect()
}

fn ensemble(cfg: &ExperimentConfig) -> Ensemble {
    cfg.ensemble.expect("validated config has an ensemble")
}

fn instance(cfg: &ExperimentConfig, seed: u64) -> Result<(Graph, NodeWeights)> {
    Ok(ensemble(cfg).with_seed(seed).instance()?)
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Fraction of nodes whose LP value is 0 or 1.
pub fn lp_integral_fraction(g: &Graph, w: &NodeWeights) -> Result<f64> {
    Ok(solve_edge_lp(g, w)?.integral_fraction())
}

pub(super) fn lp_tightness(cfg: &ExperimentConfig) -> Result<RunReport> {
    let trials = run_trials(cfg, |seed| {
        let (g, w) = instance(cfg, seed)?;
        let sol = solve_edge_lp(&g, &w)?;
        Ok(vec![
            g.node_count() as f64,
            g.edge_count() as f64,
            sol.integral_fraction(),
            sol.objective,
        ])
    })?;
    let mut report = RunReport::new(
        cfg,
        &["nodes", "edges", "integral_fraction", "lp_objective"],
        trials,
    );
    threshold_on_mean(&mut report, cfg, "integral_fraction");
    Ok(report)
}

fn threshold_on_mean(report: &mut RunReport, cfg: &ExperimentConfig, column: &str) {
    if let (Some(th), Some(mean)) = (cfg.effective_threshold(), report.mean(column)) {
        report.check(
            &format!("mean {column} >= threshold"),
            mean >= th,
            false,
            format!("mean {mean:.6}, threshold {th}"),
        );
    }
}

fn threshold_on_min(report: &mut RunReport, cfg: &ExperimentConfig, column: &str) {
    if let (Some(th), Some(col)) = (cfg.effective_threshold(), report.column(column)) {
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        report.check(
            &format!("every trial {column} >= threshold"),
            col.iter().all(|&v| v >= th),
            false,
            format!("min {min:.6}, threshold {th}"),
        );
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConvergenceStats {
    pub nodes: usize,
    /// Constant `Zero` or `One` over the last window.
    pub converged: usize,
    /// Converged nodes whose value differs from the LP optimum.
    pub disagreements: usize,
    pub oscillating: usize,
    pub stuck_unknown: usize,
    pub fixed_point_at: Option<u32>,
}

impl ConvergenceStats {
    pub fn converged_fraction(&self) -> f64 {
        if self.nodes == 0 {
            1.0
        } else {
            self.converged as f64 / self.nodes as f64
        }
    }

    /// Agreement among converged nodes; 1 when none converged.
    pub fn agreement(&self) -> f64 {
        if self.converged == 0 {
            1.0
        } else {
            1.0 - self.disagreements as f64 / self.converged as f64
        }
    }
}

/// Runs `iterations` rounds and compares the converged estimates with an LP
/// optimum.
pub fn converged_agreement(
    g: &Graph,
    w: &NodeWeights,
    iterations: u32,
    tolerance: f64,
) -> Result<ConvergenceStats> {
    let window = CONVERGENCE_WINDOW.min(iterations);
    let cfg = MpConfig::new(iterations)
        .tolerance(tolerance)
        .parallel(true)
        .trace(TraceMode::Window(window.max(2) as usize));
    let run = mp_run_with(g, w, &cfg);
    let lp = solve_edge_lp(g, w)?;
    let mut stats = ConvergenceStats {
        nodes: g.node_count(),
        fixed_point_at: run.fixed_point_at,
        ..Default::default()
    };
    for (i, b) in classify_tail(&run.trace, window as usize)
        .into_iter()
        .enumerate()
    {
        match b {
            NodeBehavior::Converged(x) => {
                stats.converged += 1;
                let expected = if x == TriState::One {
                    Half::ONE
                } else {
                    Half::ZERO
                };
                if lp.x[i] != expected {
                    stats.disagreements += 1;
                }
            }
            NodeBehavior::Oscillating => stats.oscillating += 1,
            NodeBehavior::StuckUnknown => stats.stuck_unknown += 1,
            NodeBehavior::Unsettled => {}
        }
    }
    Ok(stats)
}

pub(super) fn mp_convergence(cfg: &ExperimentConfig) -> Result<RunReport> {
    let trials = run_trials(cfg, |seed| {
        let (g, w) = instance(cfg, seed)?;
        let s = converged_agreement(&g, &w, cfg.iterations, cfg.tolerance)?;
        let n = s.nodes.max(1) as f64;
        Ok(vec![
            s.nodes as f64,
            s.converged_fraction(),
            s.agreement(),
            s.disagreements as f64,
            s.oscillating as f64 / n,
            s.stuck_unknown as f64 / n,
            s.fixed_point_at.map_or(0.0, f64::from),
        ])
    })?;
    let mut report = RunReport::new(
        cfg,
        &[
            "nodes",
            "converged_fraction",
            "agreement",
            "disagreements",
            "oscillating_fraction",
            "unknown_fraction",
            "fixed_point_at",
        ],
        trials,
    );
    let bad: f64 = report
        .column("disagreements")
        .unwrap_or_default()
        .iter()
        .sum();
    report.summary.insert("disagreements".into(), bad);
    report.check(
        "converged nodes agree with the LP optimum",
        bad == 0.0,
        true,
        format!("{bad} disagreements"),
    );
    threshold_on_min(&mut report, cfg, "converged_fraction");
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityStats {
    /// Nodes `One` at both of the last two iterations.
    pub set: Vec<usize>,
    pub independent: bool,
    pub set_weight: f64,
    pub lp_value: f64,
    /// `W(set) / LP value`, 0 for an empty set.
    pub ratio: f64,
}

/// Stable set after `iterations` rounds, measured against the LP bound.
pub fn quality_ratio(
    g: &Graph,
    w: &NodeWeights,
    iterations: u32,
    tolerance: f64,
) -> Result<QualityStats> {
    let cfg = MpConfig::new(iterations)
        .tolerance(tolerance)
        .parallel(true)
        .trace(TraceMode::Window(2));
    let run = mp_run_with(g, w, &cfg);
    let (set, independent) = match extract_stable_set(g, &run.trace, iterations) {
        Ok(set) => (set, true),
        Err(MaxProductError::NotIndependent(..)) => {
            let last = run.trace.last().expect("non-empty trace");
            let prev = run.trace.get(iterations - 1).expect("window of two");
            let set = (0..g.node_count())
                .filter(|&i| last.estimate[i] == TriState::One && prev.estimate[i] == TriState::One)
                .collect();
            (set, false)
        }
        Err(e) => return Err(e.into()),
    };
    let lp = solve_edge_lp(g, w)?;
    let scaled = ScaledWeights::new(w)?;
    let set_weight = scaled.to_f64(scaled.sum_of(&set));
    let ratio = if lp.objective > 0.0 {
        set_weight / lp.objective
    } else {
        0.0
    };
    Ok(QualityStats {
        set,
        independent,
        set_weight,
        lp_value: lp.objective,
        ratio,
    })
}

pub(super) fn stable_set_quality(cfg: &ExperimentConfig) -> Result<RunReport> {
    let on_trees = ensemble(cfg).is_tree_model();
    let trials = run_trials(cfg, |seed| {
        let (g, w) = instance(cfg, seed)?;
        let q = quality_ratio(&g, &w, cfg.iterations, cfg.tolerance)?;
        let mut row = vec![
            g.node_count() as f64,
            q.set.len() as f64,
            q.set_weight,
            q.lp_value,
            q.ratio,
            flag(q.independent),
        ];
        if on_trees {
            let best = tree_mwis_classify(&g, 0, &w)?;
            let scaled = ScaledWeights::new(&w)?;
            let (got, opt) = (scaled.sum_of(&q.set), scaled.sum_of(&best.set));
            row.push(if got == opt {
                1.0
            } else {
                scaled.to_f64(got) / scaled.to_f64(opt)
            });
        }
        Ok(row)
    })?;
    let mut columns = vec![
        "nodes",
        "set_size",
        "set_weight",
        "lp_value",
        "ratio",
        "independent",
    ];
    if on_trees {
        columns.push("exact_ratio");
    }
    let mut report = RunReport::new(cfg, &columns, trials);
    let dependent = report
        .column("independent")
        .unwrap_or_default()
        .iter()
        .filter(|&&v| v == 0.0)
        .count();
    report.check(
        "stable set is independent in every trial",
        dependent == 0,
        true,
        format!("{dependent} trials with adjacent members"),
    );
    if on_trees {
        let misses = report
            .column("exact_ratio")
            .unwrap_or_default()
            .iter()
            .filter(|&&v| v != 1.0)
            .count();
        report.check(
            "stable set is a maximum weight set on every tree",
            misses == 0,
            true,
            format!("{misses} trees below the optimum"),
        );
    }
    threshold_on_min(&mut report, cfg, "ratio");
    Ok(report)
}

/// Fraction of nodes whose radius-`depth` ball is a tree.
pub fn tree_fraction(g: &Graph, depth: u32) -> f64 {
    if g.node_count() == 0 {
        return 1.0;
    }
    let trees = (0..g.node_count())
        .filter(|&i| ball_is_tree(g, i, depth).expect("node in range"))
        .count();
    trees as f64 / g.node_count() as f64
}

pub(super) fn tree_fraction_run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let depth = cfg.depth.expect("validated");
    let trials = run_trials(cfg, |seed| {
        let g = ensemble(cfg).with_seed(seed).graph()?;
        Ok(vec![g.node_count() as f64, tree_fraction(&g, depth)])
    })?;
    let mut report = RunReport::new(cfg, &["nodes", "tree_fraction"], trials);
    threshold_on_mean(&mut report, cfg, "tree_fraction");
    Ok(report)
}

pub(super) fn boundary_monotonicity(cfg: &ExperimentConfig) -> Result<RunReport> {
    let depths = cfg.depths.clone().expect("validated");
    let deepest = *depths.iter().max().expect("non-empty");
    let model = match ensemble(cfg) {
        Ensemble::PoissonTree { c, .. } => Ensemble::PoissonTree {
            c,
            depth: deepest + 1,
        },
        Ensemble::RegularTree { r, .. } => Ensemble::RegularTree {
            r,
            depth: deepest + 1,
        },
        _ => unreachable!("validated tree ensemble"),
    };
    let trials = run_trials(cfg, |seed| {
        let tree = gen_limit_tree(&model, seed)?;
        let w = sample_exp_weights(tree.node_count(), seed);
        let mut rng = rng_for(seed, BOUNDARY_STREAM);
        let l: Vec<f64> = w
            .as_slice()
            .iter()
            .map(|&wk| wk * rng.random::<f64>())
            .collect();
        let custom = BoundaryCondition::CustomInit(l);
        let mut row = Vec::with_capacity(5 * depths.len());
        for &t in &depths {
            let bonus = |d: u32, bc: &BoundaryCondition| mp_run_tree_boundary(&tree, 0, &w, d, bc);
            let b0 = bonus(t, &BoundaryCondition::ZeroInit)?;
            let bl = bonus(t, &custom)?;
            let bw = bonus(t, &BoundaryCondition::WeightInit)?;
            let next = bonus(t + 1, &BoundaryCondition::ZeroInit)?;
            let violations = flag(b0 > bl) + flag(bl > bw) + flag(b0 > next);
            row.extend([b0, bl, bw, next, violations]);
        }
        Ok(row)
    })?;
    let columns: Vec<String> = depths
        .iter()
        .flat_map(|t| ["b0", "bl", "bw", "b0_next", "violations"].map(|c| format!("{c}_t{t}")))
        .collect();
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut report = RunReport::new(cfg, &names, trials);

    let mut total = 0.0;
    let mut gaps = Vec::new();
    for &t in &depths {
        let col = |c: &str| report.column(&format!("{c}_t{t}")).unwrap_or_default();
        let v: f64 = col("violations").iter().sum();
        let n = report.trials.len() as f64;
        let p0 = col("b0").iter().filter(|&&b| b <= 0.0).count() as f64 / n;
        let pw = col("bw").iter().filter(|&&b| b <= 0.0).count() as f64 / n;
        total += v;
        gaps.push(p0 - pw);
        report.summary.insert(format!("violations_t{t}"), v);
        report.summary.insert(format!("gap_t{t}"), p0 - pw);
    }
    report.summary.insert("violations".into(), total);
    report.check(
        "boundary orderings hold at every depth",
        total == 0.0,
        true,
        format!("{total} violations"),
    );
    let shrinking = gaps.windows(2).all(|p| p[1] <= p[0]);
    report.check(
        "gap shrinks with depth",
        shrinking,
        false,
        format!("gaps {gaps:?}"),
    );
    Ok(report)
}

/// Number of top values summed for a sample of `n` at level `epsilon`:
/// `floor(epsilon * n)`.
pub fn extremal_count(n: usize, epsilon: f64) -> usize {
    // Nudge up so that e.g. 1e-3 * 1e6 is not floored to 999.
    ((epsilon * n as f64) * (1.0 + 1e-12)).floor() as usize
}

/// `(k, (1/n) * sum of the k largest values)` with `k = floor(epsilon * n)`.
pub fn extremal_sum(values: &mut [f64], epsilon: f64) -> (usize, f64) {
    let n = values.len();
    let k = extremal_count(n, epsilon);
    if k == 0 || n == 0 {
        return (0, 0.0);
    }
    values.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    let top = &mut values[..k];
    top.sort_unstable_by(|a, b| b.total_cmp(a));
    (k, top.iter().sum::<f64>() / n as f64)
}

/// `2 epsilon (1 + ln(1/epsilon))`.
pub fn extremal_bound(epsilon: f64) -> f64 {
    2.0 * epsilon * (1.0 + (1.0 / epsilon).ln())
}

pub(super) fn extremal_sums(cfg: &ExperimentConfig) -> Result<RunReport> {
    let n = cfg.n.expect("validated");
    let eps = cfg.epsilon.expect("validated");
    let bound = extremal_bound(eps);
    let trials = run_trials(cfg, |seed| {
        let mut xs = sample_exp_weights(n, seed).into_inner();
        let (k, s) = extremal_sum(&mut xs, eps);
        Ok(vec![k as f64, s, bound, flag(s > bound)])
    })?;
    let mut report = RunReport::new(cfg, &["k", "normalized_sum", "bound", "violation"], trials);
    let violations: f64 = report.column("violation").unwrap_or_default().iter().sum();
    let l = 2.0 * (1.0 + (1.0 / eps).ln());
    report.summary.insert("violations".into(), violations);
    report.summary.insert("l_epsilon".into(), l);
    report.check(
        "top sums stay below the bound",
        violations == 0.0,
        l >= 10.0,
        format!("{violations} violations, L(eps) = {l:.3}"),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_experiment, ExperimentKind};
    use crate::graph::build_graph;

    #[test]
    fn single_node_lp_is_integral() {
        let g = Graph::edgeless(1);
        let w = NodeWeights::uniform(1, 2.0).unwrap();
        assert_eq!(lp_integral_fraction(&g, &w).unwrap(), 1.0);
    }

    #[test]
    fn edgeless_converges_immediately() {
        let g = Graph::edgeless(5);
        let w = sample_exp_weights(5, 1);
        let s = converged_agreement(&g, &w, 2, 1e-9).unwrap();
        assert_eq!(s.converged_fraction(), 1.0);
        assert_eq!(s.agreement(), 1.0);
    }

    #[test]
    fn triangle_quality_is_zero() {
        let g = build_graph(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let w = NodeWeights::uniform(3, 1.0).unwrap();
        let q = quality_ratio(&g, &w, 10, 1e-9).unwrap();
        assert!(q.set.is_empty());
        assert!(q.independent);
        assert_eq!(q.ratio, 0.0);
        assert_eq!(q.lp_value, 1.5);
    }

    #[test]
    fn tree_input_is_all_tree() {
        let g = build_graph(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert_eq!(tree_fraction(&g, 3), 1.0);
        let tri = build_graph(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(tree_fraction(&tri, 0), 1.0);
        assert_eq!(tree_fraction(&tri, 1), 0.0);
    }

    #[test]
    fn extremal_edge_cases() {
        assert_eq!(extremal_count(1_000_000, 1e-3), 1000);
        assert_eq!(extremal_count(100_000, 0.01), 1000);
        let mut few = vec![3.0, 1.0, 2.0];
        assert_eq!(extremal_sum(&mut few, 0.1), (0, 0.0));
        let mut xs = vec![1.0, 5.0, 3.0, 4.0];
        assert_eq!(extremal_sum(&mut xs, 0.5), (2, 9.0 / 4.0));
        assert!((extremal_bound(1e-3) - 2e-3 * (1.0 + 1000f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn reports_replay() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::MpConvergence, 3)
            .with_ensemble(Ensemble::ErdosRenyi { n: 300, c: 2.0 });
        cfg.seed = 5;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
        assert!(a.hard_checks_pass());
        assert_eq!(
            a.trials.iter().map(|r| r.seed).collect::<Vec<_>>(),
            vec![5, 6, 7]
        );
    }

    #[test]
    fn boundary_report_has_no_violations() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::BoundaryMonotonicity, 200)
            .with_ensemble(Ensemble::PoissonTree { c: 2.0, depth: 0 });
        cfg.depths = Some(vec![1, 3]);
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.summary["violations"], 0.0);
        assert!(r.hard_checks_pass());
        assert!(r.summary["gap_t1"] >= 0.0);
    }
}
