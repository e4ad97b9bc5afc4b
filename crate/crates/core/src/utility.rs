//! Information-loss utility model.
//!
//! Per cell the loss is `(leafs(node) - 1) / (leafs(root) - 1)` for
//! categorical hierarchies and `|upper - lower| / |max - min|` for interval
//! nodes; suppressed cells cost 1. Attribute loss is the mean over all `n`
//! records (removed records count as suppressed) and utility is one minus the
//! mean attribute loss over the quasi-identifiers.

use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::Serialize;

use crate::dataset::{Dataset, Value};
use crate::hierarchy::{Hierarchy, HierarchySet};
use crate::privacy::partition_release;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityReport {
    pub per_attribute_loss: BTreeMap<String, f64>,
    pub utility: f64,
    /// `sum |class|^2 + suppressed * n`.
    pub discernability: u64,
    pub suppressed_fraction: f64,
}

/// Loss of one raw value generalized to `level`.
pub fn cell_loss(h: &Hierarchy, value: &Value, level: usize) -> Result<f64> {
    if value.is_suppressed() {
        return Ok(1.0);
    }
    let node = h.ancestor_of_value(value, level)?;
    Ok(h.node_loss(node))
}

fn released_cell_loss(h: &Hierarchy, value: &Value) -> Result<f64> {
    match value {
        Value::Suppressed => Ok(1.0),
        v => {
            let label = v.label();
            let node = h.node_for_label(&label).ok_or_else(|| Error::UnknownLeaf {
                attribute: h.attribute().into(),
                value: label.into_owned(),
            })?;
            Ok(h.node_loss(node))
        }
    }
}

/// Mean cell loss of one attribute of a release; `suppressed` removed
/// records each add a loss of 1.
pub fn attribute_loss(release: &Dataset, attribute: &str, h: &Hierarchy, suppressed: usize) -> Result<f64> {
    let idx = release.attribute_index(attribute)?;
    let n = release.len() + suppressed;
    if n == 0 {
        return Ok(0.0);
    }
    let mut total = suppressed as f64;
    for v in release.column(idx) {
        total += released_cell_loss(h, v)?;
    }
    Ok(total / n as f64)
}

/// Utility, per-attribute loss and discernability of a release.
pub fn utility_score(release: &Dataset, hierarchies: &HierarchySet, suppressed: usize) -> Result<UtilityReport> {
    let qids = release.qid_indices();
    let mut per_attribute_loss = BTreeMap::new();
    let mut sum = 0.0;
    for &q in &qids {
        let name = &release.schema()[q].name;
        let h = hierarchies.get(name).ok_or_else(|| Error::Hierarchy {
            attribute: name.clone(),
            reason: "quasi-identifier has no hierarchy".into(),
        })?;
        let l = attribute_loss(release, name, h, suppressed)?;
        sum += l;
        per_attribute_loss.insert(name.clone(), l);
    }
    let utility = if qids.is_empty() { 1.0 } else { 1.0 - sum / qids.len() as f64 };
    let n = (release.len() + suppressed) as u64;
    let discernability = if release.is_empty() {
        0
    } else {
        partition_release(release)
            .iter()
            .map(|c| (c.size() as u64).pow(2))
            .sum::<u64>()
    } + suppressed as u64 * n;
    Ok(UtilityReport {
        per_attribute_loss,
        utility,
        discernability,
        suppressed_fraction: if n == 0 { 0.0 } else { suppressed as f64 / n as f64 },
    })
}
