use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mwis_core::ensembles::sample_exp_weights;
use mwis_core::experiments::{run_experiment, ExperimentConfig, ExperimentKind};
use mwis_core::io::{load_graph, save_graph};
use mwis_core::maxproduct::{classify_tail, MpConfig, NodeBehavior, DEFAULT_TOLERANCE};
use mwis_core::{
    classify_root, enumerate_lp_optima, extract_stable_set, mp_run_with, mwis_exact, solve_edge_lp,
    unroll, Ensemble, Graph, LpSolution, NodeWeights,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "mwis",
    version,
    about = "Max-product for maximum weight independent set"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    /// Erdős–Rényi G(n, c/n)
    Er,
    /// Uniform random r-regular graph
    Reg,
    /// Poisson(c) Galton-Watson tree
    Ptree,
    /// Regular tree (root degree r, others r - 1 children)
    Rtree,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph with Exp(1) weights and write it as JSON.
    Generate {
        #[arg(long, value_enum)]
        kind: GraphKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run max-product and print the final estimates.
    RunMp {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 30)]
        iters: u32,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        /// Write every iteration as CSV rows `t,node,bonus,estimate`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Solve the edge LP relaxation.
    SolveLp {
        #[arg(long)]
        graph: PathBuf,
        /// List every half-integral optimum instead (n <= 14).
        #[arg(long)]
        enumerate: bool,
    },
    /// Exact maximum weight independent set (n <= 40).
    SolveExact {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Unroll the computation tree of a node and classify its root.
    Comptree {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        node: usize,
        #[arg(long)]
        depth: u32,
        /// Write the tree in Graphviz DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Run a configured experiment and write CSV and JSON reports.
    Experiment {
        #[arg(long, value_parser = parse_kind)]
        kind: ExperimentKind,
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    ExperimentKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
        format!(
            "unknown experiment kind `{s}`, expected one of {}",
            names.join(", ")
        )
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            kind,
            n,
            c,
            r,
            depth,
            seed,
            out,
        } => generate(kind, n, c, r, depth, seed, &out)?,
        Command::RunMp {
            graph,
            iters,
            tol,
            trace,
        } => run_mp(&graph, iters, tol, trace.as_deref())?,
        Command::SolveLp { graph, enumerate } => solve_lp(&graph, enumerate)?,
        Command::SolveExact { graph } => {
            let (g, w) = load(&graph)?;
            let r = mwis_exact(&g, &w)?;
            print_json(&json!({ "weight": r.weight, "set": r.set }))?;
        }
        Command::Comptree {
            graph,
            node,
            depth,
            dot,
        } => {
            let (g, w) = load(&graph)?;
            let tree = unroll(&g, node, depth)?;
            if let Some(path) = dot {
                std::fs::write(&path, tree.to_dot(&w))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let root = classify_root(&g, &w, node, depth)?;
            print_json(&json!({
                "nodes": tree.len(),
                "levels": tree.depth(),
                "root": root.symbol().to_string(),
            }))?;
        }
        Command::Experiment { kind, config, out } => return experiment(kind, &config, out),
    }
    Ok(ExitCode::SUCCESS)
}

/// Loads a graph file; missing weights default to 1.
fn load(path: &Path) -> Result<(Graph, NodeWeights)> {
    let (g, w) = load_graph(path).with_context(|| format!("reading {}", path.display()))?;
    let w = match w {
        Some(w) => w,
        None => NodeWeights::uniform(g.node_count(), 1.0)?,
    };
    Ok((g, w))
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.with_context(|| format!("--{flag} is required for this kind"))
}

fn generate(
    kind: GraphKind,
    n: Option<usize>,
    c: Option<f64>,
    r: Option<usize>,
    depth: Option<u32>,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let ensemble = match kind {
        GraphKind::Er => Ensemble::ErdosRenyi {
            n: need(n, "n")?,
            c: need(c, "c")?,
        },
        GraphKind::Reg => Ensemble::RandomRegular {
            n: need(n, "n")?,
            r: need(r, "r")?,
        },
        GraphKind::Ptree => Ensemble::PoissonTree {
            c: need(c, "c")?,
            depth: need(depth, "depth")?,
        },
        GraphKind::Rtree => Ensemble::RegularTree {
            r: need(r, "r")?,
            depth: need(depth, "depth")?,
        },
    };
    ensemble.validate()?;
    let g = ensemble.with_seed(seed).graph()?;
    let w = sample_exp_weights(g.node_count(), seed);
    save_graph(out, &g, Some(&w)).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn run_mp(path: &Path, iters: u32, tol: f64, trace_path: Option<&Path>) -> Result<()> {
    if iters == 0 {
        bail!("--iters must be at least 1");
    }
    let (g, w) = load(path)?;
    let run = mp_run_with(&g, &w, &MpConfig::new(iters).tolerance(tol).parallel(true));
    if let Some(p) = trace_path {
        let file = std::fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "t,node,bonus,estimate")?;
        for snap in run.trace.iter() {
            for (i, (b, x)) in snap.bonus.iter().zip(&snap.estimate).enumerate() {
                writeln!(out, "{},{i},{b},{}", snap.t, x.symbol())?;
            }
        }
        out.flush()?;
    }
    let last = run.trace.last().expect("at least one iteration");
    let stable = if iters >= 2 {
        extract_stable_set(&g, &run.trace, iters)?
    } else {
        Vec::new()
    };
    let converged = classify_tail(&run.trace, 4)
        .iter()
        .filter(|b| matches!(b, NodeBehavior::Converged(_)))
        .count();
    let estimates: String = last.estimate.iter().map(|x| x.symbol()).collect();
    print_json(&json!({
        "iterations": iters,
        "estimates": estimates,
        "stableSet": stable,
        "stableSetWeight": w.total_of(&stable),
        "converged": converged,
        "fixedPointAt": run.fixed_point_at,
    }))
}

fn lp_json(sol: &LpSolution) -> serde_json::Value {
    json!({
        "objective": sol.objective,
        "x": sol.x,
        "fractionalCount": sol.fractional_nodes.len(),
    })
}

fn solve_lp(path: &Path, enumerate: bool) -> Result<()> {
    let (g, w) = load(path)?;
    if enumerate {
        let all = enumerate_lp_optima(&g, &w)?;
        print_json(&serde_json::Value::Array(all.iter().map(lp_json).collect()))
    } else {
        print_json(&lp_json(&solve_edge_lp(&g, &w)?))
    }
}

fn experiment(kind: ExperimentKind, config: &Path, out: Option<PathBuf>) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config, Some(kind))
        .with_context(|| format!("loading {}", config.display()))?;
    let dir = match out.or_else(|| cfg.output.clone()) {
        Some(d) => d,
        None => bail!("no output directory: pass --out or set `output` in the config"),
    };
    let report = run_experiment(&cfg)?;
    let (csv, json) = report.emit(&dir)?;
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let level = if c.hard { "hard" } else { "soft" };
        println!("[{status}] ({level}) {}: {}", c.name, c.detail);
    }
    for (k, v) in &report.summary {
        println!("{k} = {v}");
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(if report.hard_checks_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
