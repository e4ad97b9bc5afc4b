//! Linkage, homogeneity and membership risk of a generalized release.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::AttackReport;
use crate::dataset::Dataset;
use crate::hierarchy::HierarchySet;
use crate::lattice::node_id;
use crate::privacy::{partition_release, release_keys, THRESHOLD_EPS};
use crate::{Error, Result};

/// QID keys of raw `records` generalized to `levels`, in the QID order of
/// `release`.
fn generalized_keys_like(
    release: &Dataset,
    records: &Dataset,
    hierarchies: &HierarchySet,
    levels: &[usize],
) -> Result<Vec<Vec<String>>> {
    let qids = release.qid_indices();
    if levels.len() != qids.len() {
        return Err(Error::LevelCount {
            found: levels.len(),
            expected: qids.len(),
        });
    }
    let mut cols = Vec::with_capacity(qids.len());
    for &q in &qids {
        let name = &release.schema()[q].name;
        let idx = records.attribute_index(name)?;
        let h = hierarchies.get(name).ok_or_else(|| Error::Hierarchy {
            attribute: name.clone(),
            reason: "quasi-identifier has no hierarchy".into(),
        })?;
        cols.push((idx, h));
    }
    records
        .records()
        .iter()
        .map(|rec| {
            cols.iter()
                .zip(levels)
                .map(|(&(idx, h), &l)| Ok(h.generalize_value(&rec[idx], l)?.label().into_owned()))
                .collect()
        })
        .collect()
}

fn count_keys(keys: Vec<Vec<String>>) -> BTreeMap<Vec<String>, usize> {
    let mut m = BTreeMap::new();
    for k in keys {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

/// Links each external individual to the release via generalized QIDs.
/// Risk is `1/c` for `c` matching release records (0 without a match).
pub fn linkage_attack(
    release: &Dataset,
    external: &Dataset,
    hierarchies: &HierarchySet,
    levels: &[usize],
) -> Result<AttackReport> {
    let released = count_keys(release_keys(release));
    let keys = generalized_keys_like(release, external, hierarchies, levels)?;
    let mut report = AttackReport::new("linkage");
    let mut unique = 0usize;
    let mut sum = 0.0;
    for key in &keys {
        let c = released.get(key).copied().unwrap_or(0);
        let risk = if c == 0 { 0.0 } else { 1.0 / c as f64 };
        if c == 1 {
            unique += 1;
        }
        sum += risk;
        report.per_record_risk.push(Some(risk));
    }
    let n = keys.len().max(1) as f64;
    report.metrics.insert("reidentification_rate".into(), unique as f64 / n);
    report.metrics.insert("mean_risk".into(), sum / n);
    report.metrics.insert("max_risk".into(), report.max_risk().unwrap_or(0.0));
    report.config.insert("levels".into(), node_id(levels));
    report.config.insert("external_records".into(), keys.len().to_string());
    Ok(report)
}

/// Fraction of equivalence classes whose most frequent sensitive value (or
/// semantic group, when `grouping` maps values to groups) reaches
/// `threshold` of the class.
pub fn homogeneity_risk(
    release: &Dataset,
    sensitive: &str,
    threshold: f64,
    grouping: Option<&BTreeMap<String, String>>,
) -> Result<AttackReport> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Invalid(format!("threshold {threshold} outside [0, 1]")));
    }
    let sa = release.attribute_index(sensitive)?;
    let classes = partition_release(release);
    let mut report = AttackReport::new("homogeneity");
    let mut risk = alloc::vec![None; release.len()];
    let mut flagged = 0usize;
    let mut flagged_records = 0usize;
    for class in &classes {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for &m in &class.members {
            let label = release.value(m, sa).label();
            let key = grouping
                .and_then(|g| g.get(label.as_ref()).cloned())
                .unwrap_or_else(|| label.into_owned());
            *counts.entry(key).or_insert(0) += 1;
        }
        let modal = counts.values().copied().max().unwrap_or(0) as f64 / class.size() as f64;
        if modal + THRESHOLD_EPS >= threshold {
            flagged += 1;
            flagged_records += class.size();
        }
        for &m in &class.members {
            risk[m] = Some(modal);
        }
    }
    report.per_record_risk = risk;
    let classes_n = classes.len().max(1) as f64;
    report.metrics.insert("flagged_class_fraction".into(), flagged as f64 / classes_n);
    report
        .metrics
        .insert("flagged_record_fraction".into(), flagged_records as f64 / release.len().max(1) as f64);
    report.metrics.insert("classes".into(), classes.len() as f64);
    report.config.insert("sensitive".into(), sensitive.into());
    report.config.insert("threshold".into(), format!("{threshold}"));
    report
        .config
        .insert("grouping".into(), if grouping.is_some() { "semantic" } else { "none" }.into());
    Ok(report)
}

/// Per released record: released matches over population matches at the
/// release's generalization. Undefined when no population record matches.
pub fn membership_risk(
    release: &Dataset,
    population: &Dataset,
    hierarchies: &HierarchySet,
    levels: &[usize],
) -> Result<AttackReport> {
    let release_keys = release_keys(release);
    let released = count_keys(release_keys.clone());
    let population_counts = count_keys(generalized_keys_like(release, population, hierarchies, levels)?);
    let mut report = AttackReport::new("membership");
    let mut defined = 0usize;
    let mut sum = 0.0;
    let mut certain = 0usize;
    for key in &release_keys {
        match population_counts.get(key) {
            Some(&p) => {
                let r = released[key] as f64 / p as f64;
                defined += 1;
                sum += r;
                if r >= 1.0 {
                    certain += 1;
                }
                report.per_record_risk.push(Some(r));
            }
            None => report.per_record_risk.push(None),
        }
    }
    let d = defined.max(1) as f64;
    report.metrics.insert("mean_risk".into(), sum / d);
    report.metrics.insert("max_risk".into(), report.max_risk().unwrap_or(0.0));
    report.metrics.insert("certain_fraction".into(), certain as f64 / d);
    report
        .metrics
        .insert("undefined_records".into(), (release_keys.len() - defined) as f64);
    report.config.insert("levels".into(), node_id(levels));
    report.config.insert("population_records".into(), population.len().to_string());
    if defined < release_keys.len() {
        report.warnings.push(format!(
            "{} released records match no population record",
            release_keys.len() - defined
        ));
    }
    Ok(report)
}
