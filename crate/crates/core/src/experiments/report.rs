use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentKind, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    /// One value per report column.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Half-width of the normal 95% interval for the mean.
    pub ci95: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    /// `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Aggregate> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ci95 = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            1.96 * (var / n).sqrt()
        };
        Some(Aggregate {
            mean,
            ci95,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Hard checks are correctness properties; a failure fails the run.
    pub hard: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub columns: Vec<String>,
    pub trials: Vec<TrialRecord>,
    pub aggregates: BTreeMap<String, Aggregate>,
    /// Experiment-level figures that are not per-trial columns.
    pub summary: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub wall_clock_secs: f64,
}

impl RunReport {
    pub(crate) fn new(
        config: &ExperimentConfig,
        columns: &[&str],
        trials: Vec<TrialRecord>,
    ) -> Self {
        let columns: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
        let aggregates = columns
            .iter()
            .enumerate()
            .filter_map(|(k, name)| {
                let col: Vec<f64> = trials.iter().map(|r| r.values[k]).collect();
                Aggregate::of(&col).map(|a| (name.clone(), a))
            })
            .collect();
        RunReport {
            kind: config.kind,
            config: config.clone(),
            seed: config.seed,
            columns,
            trials,
            aggregates,
            summary: BTreeMap::new(),
            checks: Vec::new(),
            wall_clock_secs: 0.0,
        }
    }

    pub(crate) fn check(&mut self, name: &str, passed: bool, hard: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            hard,
            detail,
        });
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.trials.iter().map(|r| r.values[k]).collect())
    }

    pub fn mean(&self, name: &str) -> Option<f64> {
        self.aggregates.get(name).map(|a| a.mean)
    }

    pub fn hard_checks_pass(&self) -> bool {
        self.checks.iter().filter(|c| c.hard).all(|c| c.passed)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Per-trial rows: `trial,seed,<columns>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["trial".to_string(), "seed".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for r in &self.trials {
            let mut row = vec![r.trial.to_string(), r.seed.to_string()];
            row.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Writes `<kind>.csv` and `<kind>.json` into `dir`, creating it if
    /// needed, and returns both paths.
    pub fn emit(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.kind.name()));
        let json_path = dir.join(format!("{}.json", self.kind.name()));
        self.write_csv(std::fs::File::create(&csv_path)?)?;
        std::fs::write(&json_path, self.to_json()?)?;
        Ok((csv_path, json_path))
    }
}
