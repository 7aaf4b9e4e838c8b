//! Experiment reports, written as JSON and long-format CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentId {
    E1,
    E1b,
    E1c,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::E1,
        ExperimentId::E1b,
        ExperimentId::E1c,
        ExperimentId::E2,
        ExperimentId::E3,
        ExperimentId::E4,
        ExperimentId::E5,
        ExperimentId::E6,
        ExperimentId::E7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::E1 => "E1",
            ExperimentId::E1b => "E1b",
            ExperimentId::E1c => "E1c",
            ExperimentId::E2 => "E2",
            ExperimentId::E3 => "E3",
            ExperimentId::E4 => "E4",
            ExperimentId::E5 => "E5",
            ExperimentId::E6 => "E6",
            ExperimentId::E7 => "E7",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| HarnessError::UnknownExperiment(s.to_string()))
    }
}

/// Metrics of one condition; keys such as `accuracy`, `success_rate`,
/// `mean_calib`, `mean_probes`, `mean_sim_time_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub n: usize,
    pub metrics: BTreeMap<String, f64>,
}

impl Condition {
    pub fn new(name: impl Into<String>, n: usize) -> Self {
        Condition { name: name.into(), n, metrics: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: ExperimentId,
    /// Full configuration the run used, seeds included.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub conditions: Vec<Condition>,
    pub wallclock_s: f64,
}

impl ExperimentReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn metric(&self, condition: &str, key: &str) -> Option<f64> {
        self.condition(condition).and_then(|c| c.get(key))
    }

    /// Bitwise equality of every metric, ignoring wall-clock time.
    pub fn same_metrics(&self, other: &ExperimentReport) -> bool {
        self.id == other.id
            && self.seeds == other.seeds
            && self.conditions.len() == other.conditions.len()
            && self.conditions.iter().zip(&other.conditions).all(|(a, b)| {
                a.name == b.name
                    && a.n == b.n
                    && a.metrics.len() == b.metrics.len()
                    && a.metrics.iter().zip(&b.metrics).all(|((ka, va), (kb, vb))| ka == kb && va.to_bits() == vb.to_bits())
            })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "experiment,condition,n,metric,value")?;
        for c in &self.conditions {
            for (k, v) in &c.metrics {
                writeln!(w, "{},{},{},{},{}", self.id, c.name, c.n, k, v)?;
            }
        }
        Ok(())
    }

    /// Writes `<dir>/<id>.json` and `<dir>/<id>.csv`.
    pub fn save(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.id));
        let csv = dir.join(format!("{}.csv", self.id));
        std::fs::write(&json, serde_json::to_vec_pretty(self)?)?;
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(&csv)?))?;
        Ok((json, csv))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|_| HarnessError::MissingArtifact(path.display().to_string()))?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}
