//! Acceptance suite. Runs every criterion at its stated size and tolerance,
//! prints one `[PASS]` / `[FAIL]` line per criterion and exits non-zero if
//! any fails.
//!
//! Run with `cargo test -p mwis-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mwis_core::ensembles::{rng_for, sample_exp_weights};
use mwis_core::experiments::{run_experiment, ExperimentConfig, ExperimentKind, RunReport};
use mwis_core::maxproduct::{update_messages, DEFAULT_TOLERANCE};
use mwis_core::{
    classify_root, enumerate_lp_optima, gen_erdos_renyi, gen_random_regular, mp_run, mp_run_with,
    mp_step, mwis_exact, solve_edge_lp, Ensemble, Graph, Half, MessageState, MpConfig, NodeWeights,
    ScaledWeights, TraceMode, TriState,
};
use rand::Rng;

use common::small_instance;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn criterion(id: u32, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let status = if o.passed { "PASS" } else { "FAIL" };
    println!(
        "[{status}] {id}. {name}: {} ({:.1}s)",
        o.detail,
        start.elapsed().as_secs_f64()
    );
    o.passed
}

/// The 200-graph corpus shared by the first two criteria.
fn corpus() -> Vec<(Graph, NodeWeights)> {
    (0..200).map(small_instance).collect()
}

fn comptree_equivalence() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for (g, w) in corpus() {
        let run = mp_run(&g, &w, 8, DEFAULT_TOLERANCE);
        for t in 1..=8 {
            let snap = run.trace.get(t).expect("full trace");
            for i in 0..g.node_count() {
                checked += 1;
                if classify_root(&g, &w, i, t).expect("small tree") != snap.estimate[i] {
                    mismatches += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(60),
        format!("{mismatches} mismatches in {checked} (node, t) pairs"),
    )
}

fn parity() -> Outcome {
    let mut pairs = 0usize;
    let mut violations = 0usize;
    for (g, w) in corpus() {
        let run = mp_run(&g, &w, 8, DEFAULT_TOLERANCE);
        for opt in enumerate_lp_optima(&g, &w).expect("n <= 10") {
            for i in 0..g.node_count() {
                pairs += 1;
                for t in 1..=8u32 {
                    let x = run.trace.estimate(t, i).expect("full trace");
                    let odd_bad = t % 2 == 1 && opt.x[i] != Half::ZERO && x == TriState::Zero;
                    let even_bad = t % 2 == 0 && opt.x[i] != Half::ONE && x == TriState::One;
                    if odd_bad || even_bad {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over {pairs} (node, optimum) pairs"),
    )
}

fn lp_correctness() -> Outcome {
    let mut failures = Vec::new();
    for seed in 1000..1500u64 {
        let (g, w) = small_instance(seed);
        let sol = solve_edge_lp(&g, &w).expect("valid instance");
        let all = enumerate_lp_optima(&g, &w).expect("n <= 10");
        let best = all.iter().map(|o| o.doubled_objective).max();
        let exact = mwis_exact(&g, &w).expect("n <= 40");
        let sw = ScaledWeights::new(&w).expect("valid weights");
        let half_integral = sol.x.iter().all(|v| v.doubled() <= 2);
        let ok = best == Some(sol.doubled_objective)
            && half_integral
            && sol.is_feasible(&g)
            && 2 * sw.sum_of(&exact.set) <= sol.doubled_objective;
        if !ok {
            failures.push(seed);
        }
    }
    outcome(
        failures.is_empty(),
        format!("500 instances, failing seeds {failures:?}"),
    )
}

fn experiment(
    kind: ExperimentKind,
    ensemble: Ensemble,
    trials: usize,
    seed: u64,
) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind, trials).with_ensemble(ensemble);
    cfg.seed = seed;
    cfg
}

fn run(cfg: &ExperimentConfig) -> RunReport {
    run_experiment(cfg).expect("experiment runs")
}

fn lp_tightness() -> Outcome {
    let start = Instant::now();
    let er = run(&experiment(
        ExperimentKind::LpTightness,
        Ensemble::ErdosRenyi { n: 5000, c: 2.0 },
        20,
        100,
    ));
    let reg = run(&experiment(
        ExperimentKind::LpTightness,
        Ensemble::RandomRegular { n: 5000, r: 4 },
        20,
        200,
    ));
    let (a, b) = (
        er.mean("integral_fraction").unwrap(),
        reg.mean("integral_fraction").unwrap(),
    );
    outcome(
        a >= 0.95 && b >= 0.90 && start.elapsed() < Duration::from_secs(300),
        format!("mean integral fraction ER {a:.4} (>= 0.95), regular {b:.4} (>= 0.90)"),
    )
}

fn large_er(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = experiment(kind, Ensemble::ErdosRenyi { n: 20_000, c: 2.0 }, 5, 300);
    cfg.iterations = 30;
    cfg
}

fn convergence() -> Outcome {
    let r = run(&large_er(ExperimentKind::MpConvergence));
    let conv = r.column("converged_fraction").unwrap();
    let min = conv.iter().copied().fold(f64::INFINITY, f64::min);
    let bad: f64 = r.column("disagreements").unwrap().iter().sum();
    let per_trial = r.wall_clock_secs / r.trials.len() as f64;
    outcome(
        min >= 0.85 && bad == 0.0 && per_trial < 120.0,
        format!("min converged fraction {min:.4} (>= 0.85), {bad} disagreements with the LP"),
    )
}

fn stable_set_quality() -> Outcome {
    let r = run(&large_er(ExperimentKind::StableSetQuality));
    let ratios = r.column("ratio").unwrap();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let independent = r.column("independent").unwrap().iter().all(|&v| v == 1.0);

    let mut trees = Vec::new();
    for (model, seed) in [
        (Ensemble::PoissonTree { c: 2.0, depth: 5 }, 400),
        (Ensemble::RegularTree { r: 3, depth: 6 }, 500),
    ] {
        let mut cfg = experiment(ExperimentKind::StableSetQuality, model, 25, seed);
        cfg.iterations = 16;
        trees.push(run(&cfg));
    }
    let exact: Vec<f64> = trees
        .iter()
        .flat_map(|t| t.column("exact_ratio").unwrap())
        .collect();
    let sizes: Vec<f64> = trees
        .iter()
        .flat_map(|t| t.column("nodes").unwrap())
        .collect();
    let largest = sizes.iter().copied().fold(0.0, f64::max);
    let trees_ok = exact.len() == 50
        && exact.iter().all(|&v| v == 1.0)
        && largest <= 1000.0
        && trees.iter().all(|t| t.hard_checks_pass());
    outcome(
        independent && min >= 0.90 && trees_ok,
        format!(
            "independent in every trial: {independent}, min W/LP {min:.4} (>= 0.90), \
             {} of {} trees exact (largest {largest} nodes)",
            exact.iter().filter(|&&v| v == 1.0).count(),
            exact.len()
        ),
    )
}

fn boundary() -> Outcome {
    let mut total = 0.0;
    let mut gaps = Vec::new();
    for (model, seed) in [
        (Ensemble::PoissonTree { c: 2.0, depth: 0 }, 600),
        (Ensemble::RegularTree { r: 4, depth: 0 }, 700),
    ] {
        let mut cfg = experiment(ExperimentKind::BoundaryMonotonicity, model, 10_000, seed);
        cfg.depths = Some(vec![3, 5, 7]);
        let r = run(&cfg);
        total += r.summary["violations"];
        gaps.push(
            [3, 5, 7]
                .map(|t| format!("{:.3}", r.summary[&format!("gap_t{t}")]))
                .join("/"),
        );
    }
    outcome(
        total == 0.0,
        format!(
            "{total} ordering violations; gaps at t = 3/5/7: Poisson {}, regular {}",
            gaps[0], gaps[1]
        ),
    )
}

fn extremal() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ExtremalSums, 100);
    cfg.n = Some(1_000_000);
    cfg.epsilon = Some(1e-3);
    cfg.seed = 800;
    let r = run(&cfg);
    let v = r.summary["violations"];
    let worst = r.aggregates["normalized_sum"].max;
    outcome(
        v == 0.0,
        format!(
            "{v} violations in 100 trials, largest normalized sum {worst:.5} vs bound {:.5}",
            r.trials[0].values[2]
        ),
    )
}

fn message_fuzz() -> Outcome {
    let mut rng = rng_for(900, 0);
    let mut steps = 0usize;
    let mut out_of_range = 0usize;
    while steps < 100_000 {
        let n = rng.random_range(1..40usize);
        let c = rng.random_range(0.5..4.0f64).min((n.max(2) - 1) as f64);
        let g = if n < 2 {
            Graph::edgeless(n)
        } else {
            gen_erdos_renyi(n, c, rng.random()).expect("valid parameters")
        };
        let w = sample_exp_weights(n, rng.random());
        let init: Vec<f64> = (0..g.arc_count())
            .map(|_| rng.random_range(0.0..5.0))
            .collect();
        let mut s =
            MessageState::from_messages(&g, init, rng.random_range(1..10)).expect("valid state");
        for _ in 0..50 {
            s = mp_step(&g, &w, &s);
            steps += 1;
            for (a, &m) in s.messages().iter().enumerate() {
                let (i, _) = g.arc(a);
                if !(0.0..=w[i]).contains(&m) {
                    out_of_range += 1;
                }
            }
        }
    }

    // Parallel and sequential updates on graphs large enough to split.
    let mut differing = 0usize;
    for seed in 0..4u64 {
        let g = if seed % 2 == 0 {
            gen_erdos_renyi(40_000, 3.0, seed).expect("valid parameters")
        } else {
            gen_random_regular(20_000, 4, seed).expect("valid parameters")
        };
        let w = sample_exp_weights(g.node_count(), seed);
        let lean = MpConfig::new(30).trace(TraceMode::Window(2));
        let a = mp_run_with(&g, &w, &lean);
        let b = mp_run_with(&g, &w, &lean.parallel(true));
        let bits = |s: &MessageState| s.messages().iter().map(|m| m.to_bits()).collect::<Vec<_>>();
        if bits(&a.state) != bits(&b.state) || a.trace.last() != b.trace.last() {
            differing += 1;
        }
        let noise: Vec<f64> = (0..g.arc_count())
            .map(|_| rng.random_range(0.0..3.0))
            .collect();
        let mut seq = vec![0.0; g.arc_count()];
        let mut par = vec![0.0; g.arc_count()];
        update_messages(&g, &w, &noise, &mut seq, false);
        update_messages(&g, &w, &noise, &mut par, true);
        if seq
            .iter()
            .zip(&par)
            .any(|(x, y)| x.to_bits() != y.to_bits())
        {
            differing += 1;
        }
    }
    outcome(
        out_of_range == 0 && differing == 0,
        format!("{steps} steps, {out_of_range} messages out of range, {differing} parallel/sequential differences"),
    )
}

fn main() -> ExitCode {
    let results = [
        criterion(1, "computation-tree equivalence", comptree_equivalence),
        criterion(2, "estimate parity against every LP optimum", parity),
        criterion(
            3,
            "LP solver against enumeration and exact MWIS",
            lp_correctness,
        ),
        criterion(4, "LP integrality at desk scale", lp_tightness),
        criterion(5, "max-product convergence and LP agreement", convergence),
        criterion(6, "stable set quality", stable_set_quality),
        criterion(7, "boundary monotonicity on limit trees", boundary),
        criterion(8, "extremal sums of exponentials", extremal),
        criterion(9, "message range and parallel determinism", message_fuzz),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
