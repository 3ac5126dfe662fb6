use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dist::{make_distribution, Family, SizeDistribution};
use crate::error::{Error, Result};
use crate::explore::OmegaRule;

/// Either a named family or an explicit list of `[t, p]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Pmf { pmf: Vec<(usize, f64)> },
    Family(Family),
}

impl DistributionSpec {
    pub fn build(&self) -> Result<SizeDistribution> {
        match self {
            DistributionSpec::Pmf { pmf } => make_distribution(pmf),
            DistributionSpec::Family(f) => f.build(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Components,
    Degrees,
    Multiplicity,
    Explore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Jsonl,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" => Ok(ReportFormat::Jsonl),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

fn default_tasks() -> BTreeSet<Task> {
    BTreeSet::from([Task::Components])
}

fn default_omega() -> OmegaRule {
    OmegaRule::Log
}

fn default_replicates() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distribution: DistributionSpec,
    pub beta: f64,
    pub n_values: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_tasks")]
    pub tasks: BTreeSet<Task>,
    #[serde(default = "default_omega")]
    pub omega: OmegaRule,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
    /// Fill `wall_ms`. Off by default since timings break byte-identical
    /// reruns.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::ConfigParse {
            path: PathBuf::from("<inline>"),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|source| Error::ConfigParse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<SizeDistribution> {
        let q = self.distribution.build()?;
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidBeta(self.beta));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values is empty".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n == 0) {
            return Err(Error::Config(format!("n = {n} must be at least 1")));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        for &n in &self.n_values {
            let m = (self.beta * n as f64).floor() as usize;
            if m < q.max_size() {
                return Err(Error::SizeExceedsAttributes {
                    size: q.max_size(),
                    m,
                });
            }
            if self.tasks.contains(&Task::Explore) {
                let omega = self.omega.omega(n);
                if omega < 2 || omega > n {
                    return Err(Error::InvalidExploration(format!(
                        "omega = {omega} must lie in [2, n = {n}]"
                    )));
                }
            }
        }
        Ok(q)
    }
}
