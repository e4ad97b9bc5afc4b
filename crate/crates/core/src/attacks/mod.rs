//! Attack suite: synthetic data, disclosure-risk attacks on releases, the
//! reconstruction attack and the classifier experiments built on it.

pub mod admissions;
pub mod classifier;
pub mod experiments;
pub mod reconstruction;
pub mod risk;
pub mod synthetic;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

pub use self::reconstruction::{
    mutual_information_ranking, prediction_utility_experiment, reconstruction_attack, FeatureSet,
    ReconstructionConfig,
};
pub use self::risk::{homogeneity_risk, linkage_attack, membership_risk};
pub use self::synthetic::{generate_synthetic, SyntheticSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub attack: String,
    /// Per-record risk where the attack defines one; `None` marks records
    /// whose risk is undefined.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_record_risk: Vec<Option<f64>>,
    pub metrics: BTreeMap<String, f64>,
    pub config: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl AttackReport {
    pub fn new(attack: &str) -> Self {
        AttackReport {
            attack: attack.into(),
            per_record_risk: Vec::new(),
            metrics: BTreeMap::new(),
            config: BTreeMap::new(),
            seed: None,
            warnings: Vec::new(),
        }
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    /// Largest defined per-record risk.
    pub fn max_risk(&self) -> Option<f64> {
        self.per_record_risk.iter().flatten().copied().reduce(f64::max)
    }
}
