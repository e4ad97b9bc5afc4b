//! Classifier experiments on planted synthetic data: suppression against
//! microaggregation, and anonymizing high- against low-ranked features.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use super::classifier::fit_and_score;
use super::reconstruction::{mutual_information_ranking, split_indices};
use super::synthetic::{generate_synthetic, DemographicSpec, Effect, FeatureSpec, SyntheticSpec};
use crate::anonymizer::{apply_transformation, search_optimal, SearchOutcome};
use crate::dataset::{Dataset, Role};
use crate::hierarchy::{Hierarchy, HierarchySet};
use crate::lattice::node_id;
use crate::mdav::mdav_microaggregate;
use crate::privacy::PrivacyConstraint;
use crate::{Error, Result};

/// Equal-width bins per numeric QID hierarchy in these experiments.
pub const EXPERIMENT_BINS: usize = 5;

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn feature(name: &str, effects: Vec<Effect>) -> FeatureSpec {
    FeatureSpec {
        name: name.into(),
        mean: 0.0,
        noise_sd: 1.0,
        effects,
        role: Role::Insensitive,
        round: false,
        bounds: None,
    }
}

fn effect(on: &str, strength: f64, shifts: &[f64]) -> Effect {
    Effect {
        demographic: on.into(),
        strength,
        shifts: shifts.to_vec(),
    }
}

/// Three-category demographic `ethnicity` with two features separating one
/// category each, scaled by `strength`, plus a pure-noise feature.
pub fn reconstruction_spec(n: usize, strength: f64, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        n,
        seed,
        demographics: vec![DemographicSpec {
            name: "ethnicity".into(),
            categories: labels(&["white", "black", "asian"]),
            probabilities: vec![0.4, 0.35, 0.25],
            role: Role::QuasiIdentifier,
        }],
        features: vec![
            feature("heart_rate", vec![effect("ethnicity", strength, &[0.0, 8.0, 0.0])]),
            feature("glucose", vec![effect("ethnicity", strength, &[0.0, 0.0, 8.0])]),
            feature("noise", Vec::new()),
        ],
    }
}

/// Three-class `outcome` whose minority classes sit in the tails of two
/// features.
pub fn suppression_spec(n: usize, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        n,
        seed,
        demographics: vec![DemographicSpec {
            name: "outcome".into(),
            categories: labels(&["none", "readmit", "death"]),
            probabilities: vec![0.5, 0.3, 0.2],
            role: Role::Insensitive,
        }],
        features: vec![
            feature("x1", vec![effect("outcome", 1.0, &[0.0, 3.5, 0.0])]),
            feature("x2", vec![effect("outcome", 1.0, &[0.0, 0.0, 3.5])]),
        ],
    }
}

/// Three-class `outcome` with two strong, one weak and one noise feature.
pub fn feature_rank_spec(n: usize, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        n,
        seed,
        demographics: vec![DemographicSpec {
            name: "outcome".into(),
            categories: labels(&["none", "readmit", "death"]),
            probabilities: vec![0.4, 0.35, 0.25],
            role: Role::Insensitive,
        }],
        features: vec![
            feature("x1", vec![effect("outcome", 1.0, &[0.0, 3.0, 0.0])]),
            feature("x2", vec![effect("outcome", 1.0, &[0.0, 0.0, 3.0])]),
            feature("x3", vec![effect("outcome", 1.0, &[0.0, 0.3, 0.6])]),
            feature("x4", Vec::new()),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuppressionAblation {
    pub raw: f64,
    pub microaggregated: f64,
    pub suppressed: f64,
    /// Share of training records removed by suppression.
    pub suppressed_fraction: f64,
    pub k: usize,
}

/// Marks `qids` as quasi-identifiers and everything else insensitive.
fn with_qids(data: &Dataset, qids: &[String]) -> Result<Dataset> {
    let mut out = data.clone();
    for a in data.schema() {
        let role = if qids.contains(&a.name) { Role::QuasiIdentifier } else { Role::Insensitive };
        out = out.with_role(&a.name, role)?;
    }
    Ok(out)
}

fn bin_hierarchies(data: &Dataset, attrs: &[String]) -> Result<HierarchySet> {
    attrs
        .iter()
        .map(|a| {
            let idx = data.attribute_index(a)?;
            Hierarchy::bin_numeric(a, &data.numeric_column(idx), EXPERIMENT_BINS)
        })
        .collect()
}

/// Trains on the training split after (a) nothing, (b) univariate MDAV of
/// each feature and (c) removal of the records whose binned feature tuple
/// occurs fewer than `k` times; always scores on the raw test split.
pub fn suppression_vs_microaggregation(data: &Dataset, label: &str, k: usize, seed: u64) -> Result<SuppressionAblation> {
    let label_idx = data.attribute_index(label)?;
    let features: Vec<String> = data
        .schema()
        .iter()
        .filter(|a| a.is_numeric() && a.name != label)
        .map(|a| a.name.clone())
        .collect();
    let feature_idx: Vec<usize> = features.iter().map(|f| data.attribute_index(f)).collect::<Result<_>>()?;
    let (train_rows, test_rows) = split_indices(data.len(), 0.8, seed);
    let train = data.select_rows(&train_rows);
    let test = data.select_rows(&test_rows);

    let raw = fit_and_score(&train, &test, label_idx, &feature_idx, seed)?.accuracy;

    let mut micro = train.clone();
    for f in &features {
        micro = mdav_microaggregate(&micro, &[f.as_str()], k)?.output;
    }
    let microaggregated = fit_and_score(&micro, &test, label_idx, &feature_idx, seed)?.accuracy;

    let qid_train = with_qids(&train, &features)?;
    let hs = bin_hierarchies(&qid_train, &features)?;
    let binned = vec![1; features.len()];
    let candidate = apply_transformation(
        &qid_train,
        &hs,
        &binned,
        &[PrivacyConstraint::KAnonymity { k }],
        1.0,
    )?;
    if !candidate.feasible {
        return Err(Error::Invalid(candidate.reason.unwrap_or_default()));
    }
    let mut removed = vec![false; train.len()];
    for &r in &candidate.suppressed_indices {
        removed[r] = true;
    }
    let kept: Vec<usize> = (0..train.len()).filter(|&r| !removed[r]).collect();
    let suppressed = fit_and_score(&train.select_rows(&kept), &test, label_idx, &feature_idx, seed)?.accuracy;

    Ok(SuppressionAblation {
        raw,
        microaggregated,
        suppressed,
        suppressed_fraction: candidate.suppressed_indices.len() as f64 / train.len() as f64,
        k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRankAblation {
    /// Features by mutual information with the label, highest first.
    pub ranking: Vec<(String, f64)>,
    pub raw: f64,
    pub top_anonymized: f64,
    pub bottom_anonymized: f64,
    pub top_node: String,
    pub bottom_node: String,
}

/// Optimal k-anonymous generalization of `qids` (all other attributes kept).
fn anonymize_features(train: &Dataset, qids: &[String], k: usize) -> Result<(Dataset, String)> {
    let data = with_qids(train, qids)?;
    let hs = bin_hierarchies(&data, qids)?;
    match search_optimal(&data, &hs, &[PrivacyConstraint::KAnonymity { k }], 0.0, true)? {
        SearchOutcome::Found(r) => Ok((r.output, r.chosen_node.id)),
        SearchOutcome::Unsatisfiable(u) => Err(Error::Invalid(alloc::format!(
            "no k-anonymous node; top node {}",
            node_id(&u.top.levels)
        ))),
    }
}

/// Accuracy after k-anonymizing the top-ranked feature against after
/// k-anonymizing the two bottom-ranked ones; ranking uses the training split.
pub fn feature_rank_ablation(data: &Dataset, label: &str, k: usize, seed: u64) -> Result<FeatureRankAblation> {
    let label_idx = data.attribute_index(label)?;
    let features: Vec<String> = data
        .schema()
        .iter()
        .filter(|a| a.is_numeric() && a.name != label)
        .map(|a| a.name.clone())
        .collect();
    if features.len() < 3 {
        return Err(Error::Invalid("feature-rank ablation needs at least three features".into()));
    }
    let feature_idx: Vec<usize> = features.iter().map(|f| data.attribute_index(f)).collect::<Result<_>>()?;
    let (train_rows, test_rows) = split_indices(data.len(), 0.8, seed);
    let train = data.select_rows(&train_rows);
    let test = data.select_rows(&test_rows);
    let ranking = mutual_information_ranking(&train, label, &features)?;

    let raw = fit_and_score(&train, &test, label_idx, &feature_idx, seed)?.accuracy;
    let top = vec![ranking[0].0.clone()];
    let bottom: Vec<String> = ranking[ranking.len() - 2..].iter().map(|(f, _)| f.clone()).collect();
    let (top_train, top_node) = anonymize_features(&train, &top, k)?;
    let (bottom_train, bottom_node) = anonymize_features(&train, &bottom, k)?;
    let top_anonymized = fit_and_score(&top_train, &test, label_idx, &feature_idx, seed)?.accuracy;
    let bottom_anonymized = fit_and_score(&bottom_train, &test, label_idx, &feature_idx, seed)?.accuracy;
    Ok(FeatureRankAblation {
        ranking,
        raw,
        top_anonymized,
        bottom_anonymized,
        top_node,
        bottom_node,
    })
}

/// Convenience wrapper generating the data for [`suppression_vs_microaggregation`].
pub fn run_suppression_ablation(n: usize, seed: u64) -> Result<SuppressionAblation> {
    let data = generate_synthetic(&suppression_spec(n, seed))?;
    suppression_vs_microaggregation(&data, "outcome", n / 10, seed)
}

/// Convenience wrapper generating the data for [`feature_rank_ablation`].
pub fn run_feature_rank_ablation(n: usize, seed: u64) -> Result<FeatureRankAblation> {
    let data = generate_synthetic(&feature_rank_spec(n, seed))?;
    feature_rank_ablation(&data, "outcome", n / 10, seed)
}
