//! Reconstruction attack, prediction-utility experiments and the
//! mutual-information feature ranking.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::classifier::{fit_and_score, Score};
use super::AttackReport;
use crate::dataset::{Dataset, Role};
use crate::math::ln;
use crate::{Error, Result};

/// Gain over the majority baseline below which an attack reports no
/// significant leakage.
pub const LEAKAGE_MARGIN: f64 = 0.03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    /// Fraction of records whose true target the adversary knows.
    #[serde(default = "half")]
    pub known_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    /// Released features; defaults to every attribute other than the target
    /// that is not a quasi-identifier.
    #[serde(default)]
    pub features: Option<Vec<String>>,
}

fn half() -> f64 {
    0.5
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            known_fraction: 0.5,
            seed: 0,
            features: None,
        }
    }
}

/// Seeded permutation split into `(first, rest)` with `round(n * fraction)`
/// rows first, both parts in index order.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let cut = ((n as f64) * fraction + 0.5) as usize;
    let cut = cut.min(n);
    let mut a = idx[..cut].to_vec();
    let mut b = idx[cut..].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

fn resolve(dataset: &Dataset, names: &[String]) -> Result<Vec<usize>> {
    names.iter().map(|n| dataset.attribute_index(n)).collect()
}

/// Trains the baseline classifier on the known records and reports holdout
/// accuracy against the majority baseline.
pub fn reconstruction_attack(dataset: &Dataset, target: &str, config: &ReconstructionConfig) -> Result<AttackReport> {
    if !(config.known_fraction > 0.0 && config.known_fraction < 1.0) {
        return Err(Error::Invalid(format!(
            "known fraction {} outside (0, 1)",
            config.known_fraction
        )));
    }
    let label = dataset.attribute_index(target)?;
    let features = match &config.features {
        Some(names) => {
            if names.iter().any(|n| n == target) {
                return Err(Error::Invalid(format!("target {target} is listed as a released feature")));
            }
            resolve(dataset, names)?
        }
        None => (0..dataset.schema().len())
            .filter(|&i| i != label && dataset.schema()[i].role != Role::QuasiIdentifier)
            .collect(),
    };
    let (known, holdout) = split_indices(dataset.len(), config.known_fraction, config.seed);
    let train = dataset.select_rows(&known);
    let test = dataset.select_rows(&holdout);
    let score = fit_and_score(&train, &test, label, &features, config.seed)?;

    let mut report = AttackReport::new("reconstruction");
    report.seed = Some(config.seed);
    report.metrics.insert("baseline_accuracy".into(), score.baseline);
    report.config.insert("target".into(), target.into());
    report.config.insert("known_fraction".into(), format!("{}", config.known_fraction));
    report.config.insert("known_records".into(), known.len().to_string());
    report.config.insert("holdout_records".into(), holdout.len().to_string());
    report.config.insert(
        "features".into(),
        features
            .iter()
            .map(|&i| dataset.schema()[i].name.as_str())
            .collect::<Vec<_>>()
            .join(","),
    );
    if score.trained {
        report.metrics.insert("accuracy".into(), score.accuracy);
        report.metrics.insert("gain_over_baseline".into(), score.accuracy - score.baseline);
        if score.accuracy - score.baseline <= LEAKAGE_MARGIN {
            report.warnings.push("no significant leakage".into());
        }
    } else {
        report
            .warnings
            .push("known records hold a single target class; only the baseline is reported".into());
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    DemographicsOnly,
    FeaturesOnly,
    All,
}

/// Attributes used as predictors: quasi-identifiers are the demographics,
/// every other non-identifier attribute is a feature.
pub fn feature_columns(dataset: &Dataset, label: usize, set: FeatureSet) -> Vec<usize> {
    (0..dataset.schema().len())
        .filter(|&i| i != label)
        .filter(|&i| {
            let qid = dataset.schema()[i].role == Role::QuasiIdentifier;
            match set {
                FeatureSet::DemographicsOnly => qid,
                FeatureSet::FeaturesOnly => !qid,
                FeatureSet::All => true,
            }
        })
        .collect()
}

/// 80/20 split accuracy of the baseline classifier.
pub fn prediction_utility_experiment(dataset: &Dataset, label: &str, set: FeatureSet, seed: u64) -> Result<Score> {
    let idx = dataset.attribute_index(label)?;
    if dataset.schema()[idx].is_numeric() {
        return Err(Error::Invalid(format!("label {label} must be categorical")));
    }
    if dataset.distinct_labels(idx).len() < 2 {
        return Err(Error::Invalid(format!("label {label} is constant")));
    }
    let (train, test) = split_indices(dataset.len(), 0.8, seed);
    fit_and_score(
        &dataset.select_rows(&train),
        &dataset.select_rows(&test),
        idx,
        &feature_columns(dataset, idx, set),
        seed,
    )
}

pub const MI_BINS: usize = 10;

/// Quantile bin of every value: bin edges are the values at ranks
/// `i * n / bins`, and a value falls in the number of edges at or below it.
pub fn quantile_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let edges: Vec<f64> = (1..bins).map(|i| sorted[i * n / bins]).collect();
    values
        .iter()
        .map(|&x| edges.partition_point(|&e| e <= x))
        .collect()
}

/// Mutual information (nats) between two discrete codings of the same rows.
pub fn mutual_information(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut px: BTreeMap<usize, usize> = BTreeMap::new();
    let mut py: BTreeMap<usize, usize> = BTreeMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *joint.entry((a, b)).or_insert(0) += 1;
        *px.entry(a).or_insert(0) += 1;
        *py.entry(b).or_insert(0) += 1;
    }
    joint
        .iter()
        .map(|(&(a, b), &c)| {
            let pxy = c as f64 / n;
            pxy * ln(pxy * n * n / (px[&a] as f64 * py[&b] as f64))
        })
        .sum()
}

fn codes(dataset: &Dataset, attribute: usize) -> Vec<usize> {
    if dataset.schema()[attribute].is_numeric() {
        let xs: Vec<f64> = dataset
            .column(attribute)
            .map(|v| v.as_number().unwrap_or(f64::NAN))
            .collect();
        quantile_bins(&xs, MI_BINS)
    } else {
        let mut ids: BTreeMap<String, usize> = BTreeMap::new();
        dataset
            .column(attribute)
            .map(|v| {
                let next = ids.len();
                *ids.entry(v.label().into_owned()).or_insert(next)
            })
            .collect()
    }
}

/// Features ranked by mutual information with the label, highest first;
/// ties keep schema order.
pub fn mutual_information_ranking(dataset: &Dataset, label: &str, features: &[String]) -> Result<Vec<(String, f64)>> {
    let y = codes(dataset, dataset.attribute_index(label)?);
    let mut ranked = Vec::with_capacity(features.len());
    for f in features {
        let x = codes(dataset, dataset.attribute_index(f)?);
        ranked.push((f.clone(), mutual_information(&x, &y)));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ranked)
}
