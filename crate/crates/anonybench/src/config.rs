//! Run configuration. Relative paths are resolved against the directory of
//! the config file; the report echoes them as written.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anonybench_core::PrivacyConstraint;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::io::read_text;

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub schema: PathBuf,
    /// Directory holding one `<attribute>.csv` per quasi-identifier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchies: Option<PathBuf>,
    /// Equal-width bin counts for numeric quasi-identifiers without a file.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bins: BTreeMap<String, usize>,
    #[serde(default)]
    pub constraints: Vec<PrivacyConstraint>,
    #[serde(default)]
    pub suppression_limit: f64,
    #[serde(default = "yes")]
    pub prune: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Outputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attacks: Option<AttackConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp: Option<DpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub port: Option<u16>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub release: PathBuf,
    pub report: PathBuf,
    pub attacks: PathBuf,
    pub graph: PathBuf,
    pub graph_report: PathBuf,
    pub dp_answers: PathBuf,
    pub dp_ledger: PathBuf,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            release: "out/release.csv".into(),
            report: "out/report.json".into(),
            attacks: "out/attacks.json".into(),
            graph: "out/graph_anonymized.csv".into(),
            graph_report: "out/graph_report.json".into(),
            dp_answers: "out/dp_answers.json".into(),
            dp_ledger: "out/dp_ledger.jsonl".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linkage: Option<LinkageConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homogeneity: Option<HomogeneityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership: Option<MembershipConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionAttack>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkageConfig {
    /// Identified table holding the raw quasi-identifiers.
    pub external: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneityConfig {
    pub sensitive: String,
    pub threshold: f64,
    /// `value,group` CSV of semantically similar sensitive values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipConfig {
    pub population: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionAttack {
    pub target: String,
    #[serde(default = "half")]
    pub known_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<String>>,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub edges: PathBuf,
    pub k: usize,
    /// Node count when isolated high ids are absent from the edge list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpConfig {
    pub total_epsilon: f64,
    pub queries: Vec<DpQuery>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DpQuery {
    Count {
        #[serde(default, rename = "where")]
        filter: BTreeMap<String, String>,
        epsilon: f64,
    },
    Histogram {
        attribute: String,
        epsilon: f64,
    },
}

impl RunConfig {
    pub fn parse(json: &str, base_dir: &Path) -> Result<RunConfig> {
        let mut c: RunConfig = serde_json::from_str(json).context("run config")?;
        c.base_dir = base_dir.to_path_buf();
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::parse(&read_text(path)?, &base).with_context(|| format!("in {}", path.display()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Referenced input files exist and run parameters are in range.
    /// Constraint parameters are checked against the data by the engine.
    pub fn validate(&self) -> Result<()> {
        let mut inputs: Vec<&Path> = vec![&self.dataset, &self.schema];
        if let Some(a) = &self.attacks {
            if let Some(l) = &a.linkage {
                inputs.push(&l.external);
            }
            if let Some(m) = &a.membership {
                inputs.push(&m.population);
            }
            if let Some(g) = a.homogeneity.as_ref().and_then(|h| h.grouping.as_ref()) {
                inputs.push(g);
            }
        }
        if let Some(g) = &self.graph {
            inputs.push(&g.edges);
        }
        for p in inputs {
            let full = self.resolve(p);
            if !full.is_file() {
                bail!("input file {} does not exist", full.display());
            }
        }
        if let Some(dir) = &self.hierarchies {
            let full = self.resolve(dir);
            if !full.is_dir() {
                bail!("hierarchy directory {} does not exist", full.display());
            }
        }
        if !(0.0..=1.0).contains(&self.suppression_limit) {
            bail!("suppression_limit {} outside [0, 1]", self.suppression_limit);
        }
        if let Some((name, &b)) = self.bins.iter().find(|(_, &b)| b < 2) {
            bail!("bins for {name} must be >= 2, got {b}");
        }
        if let Some(h) = self.attacks.as_ref().and_then(|a| a.homogeneity.as_ref()) {
            if !(0.0..=1.0).contains(&h.threshold) {
                bail!("homogeneity threshold {} outside [0, 1]", h.threshold);
            }
        }
        if let Some(g) = &self.graph {
            if g.k == 0 {
                bail!("graph k must be >= 1");
            }
        }
        if let Some(dp) = &self.dp {
            let eps = dp.queries.iter().map(|q| match q {
                DpQuery::Count { epsilon, .. } | DpQuery::Histogram { epsilon, .. } => *epsilon,
            });
            if !(dp.total_epsilon > 0.0) || eps.clone().any(|e| !(e > 0.0)) {
                bail!("privacy budgets must be positive");
            }
        }
        Ok(())
    }

    pub fn port(&self) -> u16 {
        self.port.unwrap_or(DEFAULT_PORT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let c = RunConfig::parse(
            r#"{"dataset": "d.csv", "schema": "s.json", "constraints": [{"model": "k-anonymity", "k": 5}]}"#,
            Path::new("/tmp/run"),
        )
        .unwrap();
        assert!(c.prune);
        assert_eq!(c.suppression_limit, 0.0);
        assert_eq!(c.resolve(&c.dataset), PathBuf::from("/tmp/run/d.csv"));
        assert_eq!(c.resolve(Path::new("/abs")), PathBuf::from("/abs"));
        assert_eq!(c.constraints, vec![PrivacyConstraint::KAnonymity { k: 5 }]);
        assert_eq!(c.port(), DEFAULT_PORT);
    }

    #[test]
    fn dp_queries_parse() {
        let c = RunConfig::parse(
            r#"{"dataset": "d.csv", "schema": "s.json",
                "dp": {"total_epsilon": 1, "queries": [
                    {"type": "count", "where": {"gender": "F"}, "epsilon": 0.5},
                    {"type": "histogram", "attribute": "dx", "epsilon": 0.5}]}}"#,
            Path::new("."),
        )
        .unwrap();
        assert_eq!(c.dp.unwrap().queries.len(), 2);
    }

    #[test]
    fn unknown_keys_and_missing_files_are_errors() {
        assert!(RunConfig::parse(r#"{"dataset": "d", "schema": "s", "bogus": 1}"#, Path::new(".")).is_err());
        let c = RunConfig::parse(r#"{"dataset": "nope.csv", "schema": "s"}"#, Path::new("/nonexistent")).unwrap();
        assert!(format!("{:#}", c.validate().unwrap_err()).contains("does not exist"));
    }
}
