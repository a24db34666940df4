//! Monte Carlo experiments over the random ensembles.
//!
//! An [`ExperimentConfig`] fully determines a [`RunReport`]: trial `k` uses
//! seed `seed + k`, trials run in parallel and are collected in index order,
//! so the per-trial records replay exactly.

mod report;
mod runners;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensembles::{Ensemble, EnsembleError};
use crate::exact::ExactError;
use crate::graph::GraphError;
use crate::lp::LpError;
use crate::maxproduct::{MaxProductError, DEFAULT_TOLERANCE};
use crate::weights::WeightError;

pub use report::{Aggregate, Check, RunReport, TrialRecord};
pub use runners::{
    converged_agreement, extremal_bound, extremal_count, extremal_sum, lp_integral_fraction,
    quality_ratio, tree_fraction, ConvergenceStats, QualityStats,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    MaxProduct(#[from] MaxProductError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    LpTightness,
    MpConvergence,
    StableSetQuality,
    TreeFraction,
    BoundaryMonotonicity,
    ExtremalSums,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::LpTightness,
        ExperimentKind::MpConvergence,
        ExperimentKind::StableSetQuality,
        ExperimentKind::TreeFraction,
        ExperimentKind::BoundaryMonotonicity,
        ExperimentKind::ExtremalSums,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LpTightness => "lp_tightness",
            ExperimentKind::MpConvergence => "mp_convergence",
            ExperimentKind::StableSetQuality => "stable_set_quality",
            ExperimentKind::TreeFraction => "tree_fraction",
            ExperimentKind::BoundaryMonotonicity => "boundary_monotonicity",
            ExperimentKind::ExtremalSums => "extremal_sums",
        }
    }

    /// Accepts `lp_tightness`, `lp-tightness` or `LpTightness`.
    pub fn parse(s: &str) -> Option<ExperimentKind> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Self::ALL
            .into_iter()
            .find(|k| k.name().replace('_', "") == key)
    }
}

fn default_iterations() -> u32 {
    30
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// Parameters of one experiment. Which optional fields are required depends
/// on `kind`; see [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<Ensemble>,
    /// Max-product iterations `T`.
    #[serde(default = "default_iterations")]
    pub iterations: u32,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub trials: usize,
    /// Master seed; trial `k` uses `seed + k`.
    #[serde(default)]
    pub seed: u64,
    /// Ball radius for `tree_fraction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// Odd tree depths for `boundary_monotonicity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<u32>>,
    /// Sample size for `extremal_sums`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Overrides the kind's default pass threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, trials: usize) -> Self {
        Self {
            kind,
            ensemble: None,
            iterations: default_iterations(),
            tolerance: default_tolerance(),
            trials,
            seed: 0,
            depth: None,
            depths: None,
            n: None,
            epsilon: None,
            threshold: None,
            output: None,
        }
    }

    pub fn with_ensemble(mut self, ensemble: Ensemble) -> Self {
        self.ensemble = Some(ensemble);
        self
    }

    /// Parses TOML, or JSON when the text starts with `{`. A missing `kind`
    /// is taken from `kind`; a conflicting one is an error.
    pub fn parse(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        let mut value: serde_json::Value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            let table: toml::Table = toml::from_str(text)?;
            serde_json::to_value(table)?
        };
        let obj = value
            .as_object_mut()
            .ok_or_else(|| ExperimentError::Config("config must be a table".into()))?;
        if let Some(kind) = kind {
            match obj.get("kind") {
                None => {
                    obj.insert("kind".into(), serde_json::to_value(kind)?);
                }
                Some(v) => {
                    let given: ExperimentKind = serde_json::from_value(v.clone())?;
                    if given != kind {
                        return Err(ExperimentError::Config(format!(
                            "config says kind = {}, command line says {}",
                            given.name(),
                            kind.name()
                        )));
                    }
                }
            }
        }
        let cfg: ExperimentConfig = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, kind: Option<ExperimentKind>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, kind)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return bad(format!(
                "tolerance {} must be finite and non-negative",
                self.tolerance
            ));
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("threshold {t} outside [0, 1]"));
            }
        }
        if let Some(e) = &self.ensemble {
            e.validate()?;
        }
        let needs_ensemble = !matches!(self.kind, ExperimentKind::ExtremalSums);
        let ensemble = match (self.ensemble, needs_ensemble) {
            (None, true) => return bad(format!("{} needs an ensemble", self.kind.name())),
            (e, _) => e,
        };
        match self.kind {
            ExperimentKind::LpTightness => {}
            ExperimentKind::MpConvergence => {
                if self.iterations < 2 {
                    return bad("mp_convergence needs iterations >= 2".into());
                }
            }
            ExperimentKind::StableSetQuality => {
                if self.iterations < 2 {
                    return bad("stable_set_quality needs iterations >= 2".into());
                }
                if let Some(depth) = ensemble.and_then(|e| tree_depth(&e)) {
                    // Exact on a tree once T exceeds its diameter (<= 2 depth) by 2.
                    if self.iterations < 2 * depth + 2 {
                        return bad(format!(
                            "tree of depth {depth} needs iterations >= {}",
                            2 * depth + 2
                        ));
                    }
                }
            }
            ExperimentKind::TreeFraction => {
                if self.depth.is_none() {
                    return bad("tree_fraction needs depth".into());
                }
            }
            ExperimentKind::BoundaryMonotonicity => {
                if !ensemble.is_some_and(|e| e.is_tree_model()) {
                    return bad("boundary_monotonicity needs a tree ensemble".into());
                }
                match &self.depths {
                    Some(d) if !d.is_empty() && d.iter().all(|t| t % 2 == 1) => {}
                    _ => {
                        return bad(
                            "boundary_monotonicity needs a non-empty list of odd depths".into()
                        )
                    }
                }
            }
            ExperimentKind::ExtremalSums => {
                if !self.n.is_some_and(|n| n > 0) {
                    return bad("extremal_sums needs n >= 1".into());
                }
                if !self.epsilon.is_some_and(|e| e > 0.0 && e < 1.0) {
                    return bad("extremal_sums needs 0 < epsilon < 1".into());
                }
            }
        }
        Ok(())
    }

    /// The pass threshold in force: the configured one, or the kind's default.
    pub fn effective_threshold(&self) -> Option<f64> {
        if self.threshold.is_some() {
            return self.threshold;
        }
        match (self.kind, self.ensemble) {
            (ExperimentKind::LpTightness, Some(Ensemble::RandomRegular { .. })) => Some(0.90),
            (ExperimentKind::LpTightness, _) => Some(0.95),
            (ExperimentKind::MpConvergence, _) => Some(0.85),
            (ExperimentKind::StableSetQuality, _) => Some(0.90),
            (ExperimentKind::TreeFraction, _) => Some(0.90),
            _ => None,
        }
    }

    pub(crate) fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}

fn tree_depth(e: &Ensemble) -> Option<u32> {
    match *e {
        Ensemble::PoissonTree { depth, .. } | Ensemble::RegularTree { depth, .. } => Some(depth),
        _ => None,
    }
}

/// Runs the experiment described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let mut report = match cfg.kind {
        ExperimentKind::LpTightness => runners::lp_tightness(cfg),
        ExperimentKind::MpConvergence => runners::mp_convergence(cfg),
        ExperimentKind::StableSetQuality => runners::stable_set_quality(cfg),
        ExperimentKind::TreeFraction => runners::tree_fraction_run(cfg),
        ExperimentKind::BoundaryMonotonicity => runners::boundary_monotonicity(cfg),
        ExperimentKind::ExtremalSums => runners::extremal_sums(cfg),
    }?;
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names() {
        for k in ExperimentKind::ALL {
            assert_eq!(ExperimentKind::parse(k.name()), Some(k));
            assert_eq!(ExperimentKind::parse(&k.name().replace('_', "-")), Some(k));
        }
        assert_eq!(
            ExperimentKind::parse("MpConvergence"),
            Some(ExperimentKind::MpConvergence)
        );
        assert_eq!(ExperimentKind::parse("nope"), None);
    }

    #[test]
    fn toml_and_json_agree() {
        let toml = r#"
            trials = 3
            seed = 9
            [ensemble]
            model = "erdos_renyi"
            n = 50
            c = 2.0
        "#;
        let json = r#"{"kind": "lp_tightness", "trials": 3, "seed": 9,
                       "ensemble": {"model": "erdos_renyi", "n": 50, "c": 2.0}}"#;
        let a = ExperimentConfig::parse(toml, Some(ExperimentKind::LpTightness)).unwrap();
        let b = ExperimentConfig::parse(json, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iterations, 30);
        assert_eq!(a.effective_threshold(), Some(0.95));
        assert!(ExperimentConfig::parse(json, Some(ExperimentKind::TreeFraction)).is_err());
    }

    #[test]
    fn validation() {
        let er = Ensemble::ErdosRenyi { n: 10, c: 1.0 };
        assert!(ExperimentConfig::new(ExperimentKind::LpTightness, 0)
            .with_ensemble(er)
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(ExperimentKind::LpTightness, 1)
            .validate()
            .is_err());
        assert!(ExperimentConfig::new(ExperimentKind::TreeFraction, 1)
            .with_ensemble(er)
            .validate()
            .is_err());
        let mut b = ExperimentConfig::new(ExperimentKind::BoundaryMonotonicity, 1)
            .with_ensemble(Ensemble::PoissonTree { c: 2.0, depth: 3 });
        b.depths = Some(vec![3, 4]);
        assert!(b.validate().is_err());
        b.depths = Some(vec![3, 5]);
        assert!(b.validate().is_ok());
        let mut q = ExperimentConfig::new(ExperimentKind::StableSetQuality, 1)
            .with_ensemble(Ensemble::RegularTree { r: 3, depth: 20 });
        assert!(q.validate().is_err());
        q.iterations = 42;
        assert!(q.validate().is_ok());
    }
}
