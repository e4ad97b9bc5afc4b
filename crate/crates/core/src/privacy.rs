//! Equivalence classes and the privacy-model checks over them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Kind, Role};
use crate::hierarchy::HierarchySet;
use crate::math::{binomial, ln};
use crate::{Error, Result};

/// Largest number of QID subsets an LKC check enumerates.
pub const LKC_SUBSET_CAP: u64 = 1_000_000;

/// Slack for float comparisons against entropy and distance thresholds.
pub const THRESHOLD_EPS: f64 = 1e-12;

/// Records sharing one generalized QID combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceClass {
    pub key: Vec<String>,
    pub members: Vec<usize>,
}

impl EquivalenceClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Frequencies of sensitive values over a fixed support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitiveDistribution {
    pub attribute: String,
    pub support: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl SensitiveDistribution {
    pub fn new(attribute: impl Into<String>, support: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if support.len() != probabilities.len() {
            return Err(Error::SupportMismatch);
        }
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Invalid("probabilities must lie in [0, 1]".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(SensitiveDistribution {
            attribute: attribute.into(),
            support,
            probabilities,
        })
    }

    /// Empirical distribution of `counts` over `support`.
    pub fn from_counts(attribute: &str, support: &[String], counts: &[usize]) -> Self {
        let total: usize = counts.iter().sum();
        SensitiveDistribution {
            attribute: attribute.to_string(),
            support: support.to_vec(),
            probabilities: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        }
    }
}

/// Ground distance for EMD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ground {
    /// Support positions `i, j` are `|i - j| / (m - 1)` apart.
    Ordered,
    /// Every pair of distinct values is 1 apart (total variation).
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    EmdOrdered,
    EmdEqual,
    Kl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiversityVariant {
    Distinct,
    Entropy,
}

/// One privacy requirement on a release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum PrivacyConstraint {
    KAnonymity {
        k: usize,
    },
    LDiversityDistinct {
        l: usize,
        sensitive: String,
    },
    LDiversityEntropy {
        l: usize,
        sensitive: String,
    },
    TClosenessEmd {
        t: f64,
        sensitive: String,
        /// Defaults to ordered for numeric and ordered-categorical attributes.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ground: Option<Ground>,
    },
    TClosenessKl {
        t: f64,
        sensitive: String,
    },
    Lkc {
        #[serde(rename = "L")]
        l: usize,
        #[serde(rename = "K")]
        k: usize,
    },
}

impl PrivacyConstraint {
    pub fn sensitive(&self) -> Option<&str> {
        match self {
            PrivacyConstraint::LDiversityDistinct { sensitive, .. }
            | PrivacyConstraint::LDiversityEntropy { sensitive, .. }
            | PrivacyConstraint::TClosenessEmd { sensitive, .. }
            | PrivacyConstraint::TClosenessKl { sensitive, .. } => Some(sensitive),
            _ => None,
        }
    }

    /// Checks parameter ranges and attribute roles against a dataset.
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        let bad = |m: String| Err(Error::Constraint(m));
        match *self {
            PrivacyConstraint::KAnonymity { k } if k < 1 => return bad("k must be >= 1".into()),
            PrivacyConstraint::LDiversityDistinct { l, .. } | PrivacyConstraint::LDiversityEntropy { l, .. }
                if l < 1 =>
            {
                return bad("l must be >= 1".into())
            }
            PrivacyConstraint::TClosenessEmd { t, .. } if !(t > 0.0 && t <= 1.0) => {
                return bad(format!("t = {t} outside (0, 1]"))
            }
            PrivacyConstraint::TClosenessKl { t, .. } if !(t > 0.0) => return bad(format!("t = {t} must be > 0")),
            PrivacyConstraint::Lkc { l, k } => {
                let m = dataset.qid_indices().len();
                if l < 1 || l > m {
                    return bad(format!("L = {l} outside 1..={m}"));
                }
                if k < 1 {
                    return bad("K must be >= 1".into());
                }
            }
            _ => {}
        }
        if let Some(sa) = self.sensitive() {
            require_sensitive(dataset, sa)?;
        }
        if dataset.qid_indices().is_empty() {
            return bad("no quasi-identifier in schema".into());
        }
        Ok(())
    }

    /// Whether satisfaction is preserved when classes merge (no suppression).
    pub fn is_monotone(&self) -> bool {
        // All supported models are: merging classes never lowers the minimum
        // size, distinct count or entropy, and class distances to a fixed
        // global distribution are convex.
        true
    }
}

pub(crate) fn require_sensitive(dataset: &Dataset, sa: &str) -> Result<usize> {
    let idx = dataset.attribute_index(sa)?;
    if dataset.schema()[idx].role != Role::Sensitive {
        return Err(Error::Constraint(format!("`{sa}` is not a sensitive attribute")));
    }
    Ok(idx)
}

/// Generalized QID labels of every record at `levels`.
pub fn generalized_keys(dataset: &Dataset, hierarchies: &HierarchySet, levels: &[usize]) -> Result<Vec<Vec<String>>> {
    let qids = dataset.qid_indices();
    if levels.len() != qids.len() {
        return Err(Error::LevelCount {
            found: levels.len(),
            expected: qids.len(),
        });
    }
    let hs = hierarchies.for_qids(dataset)?;
    dataset
        .records()
        .iter()
        .map(|rec| {
            qids.iter()
                .zip(&hs)
                .zip(levels)
                .map(|((&q, h), &l)| Ok(h.generalize_value(&rec[q], l)?.label().into_owned()))
                .collect()
        })
        .collect()
}

/// QID labels of a release as they stand.
pub fn release_keys(release: &Dataset) -> Vec<Vec<String>> {
    let qids = release.qid_indices();
    release
        .records()
        .iter()
        .map(|r| qids.iter().map(|&q| r[q].label().into_owned()).collect())
        .collect()
}

/// Groups rows by key; classes come out sorted by key.
pub fn classes_from_keys(keys: &[Vec<String>]) -> Vec<EquivalenceClass> {
    let mut map: BTreeMap<&[String], Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        map.entry(k.as_slice()).or_default().push(i);
    }
    map.into_iter()
        .map(|(k, members)| EquivalenceClass {
            key: k.to_vec(),
            members,
        })
        .collect()
}

/// Equivalence classes of the dataset generalized to `levels` (one per QID).
pub fn partition(dataset: &Dataset, hierarchies: &HierarchySet, levels: &[usize]) -> Result<Vec<EquivalenceClass>> {
    Ok(classes_from_keys(&generalized_keys(dataset, hierarchies, levels)?))
}

/// Equivalence classes of an already generalized release.
pub fn partition_release(release: &Dataset) -> Vec<EquivalenceClass> {
    classes_from_keys(&release_keys(release))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KCheck {
    pub satisfied: bool,
    pub min_class_size: usize,
}

pub fn check_k_anonymity(classes: &[EquivalenceClass], k: usize) -> KCheck {
    let min_class_size = classes.iter().map(|c| c.size()).min().unwrap_or(0);
    KCheck {
        satisfied: !classes.is_empty() && min_class_size >= k,
        min_class_size,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LCheck {
    pub satisfied: bool,
    /// Index of the class with the fewest distinct values (or lowest entropy).
    pub worst_class: Option<usize>,
    /// That class's distinct count or entropy.
    pub worst_value: f64,
}

pub fn check_l_diversity(
    classes: &[EquivalenceClass],
    dataset: &Dataset,
    sa: &str,
    l: usize,
    variant: DiversityVariant,
) -> Result<LCheck> {
    let idx = require_sensitive(dataset, sa)?;
    let threshold = match variant {
        DiversityVariant::Distinct => l as f64,
        DiversityVariant::Entropy => ln(l as f64),
    };
    let mut worst: Option<(usize, f64)> = None;
    for (ci, c) in classes.iter().enumerate() {
        let counts = value_counts(dataset, idx, &c.members);
        let v = match variant {
            DiversityVariant::Distinct => counts.len() as f64,
            DiversityVariant::Entropy => entropy(counts.values().copied(), c.size()),
        };
        if worst.map(|(_, w)| v < w).unwrap_or(true) {
            worst = Some((ci, v));
        }
    }
    let (worst_class, worst_value) = match worst {
        Some((c, v)) => (Some(c), v),
        None => (None, 0.0),
    };
    let satisfied = worst.is_some()
        && match variant {
            DiversityVariant::Distinct => worst_value >= threshold,
            DiversityVariant::Entropy => worst_value + THRESHOLD_EPS >= threshold,
        };
    Ok(LCheck {
        satisfied,
        worst_class,
        worst_value,
    })
}

pub(crate) fn entropy(counts: impl Iterator<Item = usize>, total: usize) -> f64 {
    let n = total as f64;
    -counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * ln(p)
        })
        .sum::<f64>()
}

fn value_counts(dataset: &Dataset, attr: usize, members: &[usize]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for &m in members {
        *counts.entry(dataset.value(m, attr).label().into_owned()).or_insert(0) += 1;
    }
    counts
}

/// Earth mover's distance between two distributions over one support.
pub fn emd(p: &SensitiveDistribution, q: &SensitiveDistribution, ground: Ground) -> Result<f64> {
    if p.support != q.support {
        return Err(Error::SupportMismatch);
    }
    Ok(emd_slices(&p.probabilities, &q.probabilities, ground))
}

pub(crate) fn emd_slices(p: &[f64], q: &[f64], ground: Ground) -> f64 {
    match ground {
        Ground::Equal => 0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>(),
        Ground::Ordered => {
            let m = p.len();
            if m < 2 {
                return 0.0;
            }
            let mut acc = 0.0;
            let mut total = 0.0;
            for (a, b) in p.iter().zip(q) {
                acc += a - b;
                total += acc.abs();
            }
            total / (m - 1) as f64
        }
    }
}

/// `KL(p || q)` with `0 log 0 = 0`; infinite when `p` has mass where `q` has none.
pub fn kl_divergence(p: &SensitiveDistribution, q: &SensitiveDistribution) -> Result<f64> {
    if p.support != q.support {
        return Err(Error::SupportMismatch);
    }
    Ok(kl_slices(&p.probabilities, &q.probabilities))
}

pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * ln(a / b);
        }
    }
    d.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TCheck {
    pub satisfied: bool,
    pub worst_distance: f64,
    pub worst_class: Option<usize>,
}

/// Support of a sensitive attribute in the order used by the ordered ground
/// distance: numeric order, declared category order, or lexicographic.
pub fn sensitive_support(dataset: &Dataset, attr: usize, rows: impl Iterator<Item = usize>) -> Vec<String> {
    let schema = &dataset.schema()[attr];
    let mut seen: BTreeMap<String, Option<f64>> = BTreeMap::new();
    for r in rows {
        let v = dataset.value(r, attr);
        seen.entry(v.label().into_owned()).or_insert(v.as_number());
    }
    let mut support: Vec<(String, Option<f64>)> = seen.into_iter().collect();
    match (schema.kind, &schema.categories) {
        (Kind::Numeric, _) => support.sort_by(|a, b| match (a.1, b.1) {
            (Some(x), Some(y)) => x.partial_cmp(&y).expect("finite"),
            (Some(_), None) => core::cmp::Ordering::Less,
            (None, Some(_)) => core::cmp::Ordering::Greater,
            (None, None) => a.0.cmp(&b.0),
        }),
        (Kind::OrderedCategorical, Some(order)) => {
            let rank = |s: &str| order.iter().position(|c| c == s).unwrap_or(usize::MAX);
            support.sort_by(|a, b| rank(&a.0).cmp(&rank(&b.0)).then_with(|| a.0.cmp(&b.0)));
        }
        _ => {}
    }
    support.into_iter().map(|(s, _)| s).collect()
}

pub(crate) fn default_ground(dataset: &Dataset, attr: usize) -> Ground {
    match dataset.schema()[attr].kind {
        Kind::Numeric | Kind::OrderedCategorical => Ground::Ordered,
        Kind::Categorical => Ground::Equal,
    }
}

/// Worst distance between any class's SA distribution and the distribution
/// over all records in `classes`.
pub fn check_t_closeness(
    classes: &[EquivalenceClass],
    dataset: &Dataset,
    sa: &str,
    t: f64,
    metric: DistanceMetric,
) -> Result<TCheck> {
    let idx = require_sensitive(dataset, sa)?;
    let support = sensitive_support(dataset, idx, classes.iter().flat_map(|c| c.members.iter().copied()));
    let pos: BTreeMap<&str, usize> = support.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut global = alloc::vec![0usize; support.len()];
    let mut per_class = Vec::with_capacity(classes.len());
    for c in classes {
        let mut counts = alloc::vec![0usize; support.len()];
        for &m in &c.members {
            counts[pos[dataset.value(m, idx).label().as_ref()]] += 1;
        }
        for (g, x) in global.iter_mut().zip(&counts) {
            *g += x;
        }
        per_class.push(counts);
    }
    let q = SensitiveDistribution::from_counts(sa, &support, &global);
    let mut worst_distance = 0.0f64;
    let mut worst_class = None;
    for (ci, counts) in per_class.iter().enumerate() {
        let p = SensitiveDistribution::from_counts(sa, &support, counts);
        let d = match metric {
            DistanceMetric::EmdOrdered => emd(&p, &q, Ground::Ordered)?,
            DistanceMetric::EmdEqual => emd(&p, &q, Ground::Equal)?,
            DistanceMetric::Kl => kl_divergence(&p, &q)?,
        };
        if worst_class.is_none() || d > worst_distance {
            worst_distance = d;
            worst_class = Some(ci);
        }
    }
    Ok(TCheck {
        satisfied: !classes.is_empty() && worst_distance <= t + THRESHOLD_EPS,
        worst_distance,
        worst_class,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LkcCheck {
    pub satisfied: bool,
    /// First QID subset (by size, then index order) with a group below K.
    pub violating_subset: Option<Vec<String>>,
    pub min_group_size: usize,
}

/// Every QID subset of size at most `l` must give groups of at least `k`.
pub fn check_lkc(dataset: &Dataset, hierarchies: &HierarchySet, levels: &[usize], l: usize, k: usize) -> Result<LkcCheck> {
    let keys = generalized_keys(dataset, hierarchies, levels)?;
    lkc_on_keys(dataset, &keys, l, k)
}

/// [`check_lkc`] on an already generalized release.
pub fn check_lkc_release(release: &Dataset, l: usize, k: usize) -> Result<LkcCheck> {
    lkc_on_keys(release, &release_keys(release), l, k)
}

fn lkc_on_keys(dataset: &Dataset, keys: &[Vec<String>], l: usize, k: usize) -> Result<LkcCheck> {
    let qids = dataset.qid_indices();
    let m = qids.len();
    if l < 1 || l > m {
        return Err(Error::Constraint(format!("L = {l} outside 1..={m}")));
    }
    let count = binomial(m, l);
    if count > LKC_SUBSET_CAP {
        return Err(Error::TooManySubsets {
            count,
            l,
            cap: LKC_SUBSET_CAP,
        });
    }
    let mut min_group_size = usize::MAX;
    let mut violating_subset = None;
    for size in 1..=l {
        for subset in Combinations::new(m, size) {
            let mut groups: BTreeMap<Vec<&str>, usize> = BTreeMap::new();
            for key in keys {
                *groups.entry(subset.iter().map(|&i| key[i].as_str()).collect()).or_insert(0) += 1;
            }
            let smallest = groups.values().copied().min().unwrap_or(0);
            min_group_size = min_group_size.min(smallest);
            if smallest < k && violating_subset.is_none() {
                violating_subset = Some(subset.iter().map(|&i| dataset.schema()[qids[i]].name.clone()).collect());
            }
        }
    }
    Ok(LkcCheck {
        satisfied: violating_subset.is_none() && !keys.is_empty(),
        violating_subset,
        min_group_size: if keys.is_empty() { 0 } else { min_group_size },
    })
}

/// Lexicographic `size`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, size: usize) -> Self {
        Combinations {
            n,
            current: (size <= n).then(|| (0..size).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let size = cur.len();
        let mut i = size;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.n - size + i {
                cur[i] += 1;
                for j in i + 1..size {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        if size == 0 {
            self.current = None;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeSchema, Value};
    use crate::hierarchy::Hierarchy;
    use alloc::vec;

    fn table(qid: &[&str], sa: &[&str]) -> Dataset {
        Dataset::new(
            vec![
                AttributeSchema::new("q", Role::QuasiIdentifier, Kind::Categorical),
                AttributeSchema::new("s", Role::Sensitive, Kind::Categorical),
            ],
            qid.iter()
                .zip(sa)
                .map(|(q, s)| vec![Value::text(*q), Value::text(*s)])
                .collect(),
        )
        .unwrap()
    }

    fn flat(d: &Dataset) -> HierarchySet {
        let leaves = d.distinct_labels(0);
        [Hierarchy::flat("q", &leaves).unwrap()].into_iter().collect()
    }

    #[test]
    fn partition_level_zero_and_top() {
        let d = table(&["a", "a", "b", "b"], &["x", "y", "x", "y"]);
        let h = flat(&d);
        let cs = partition(&d, &h, &[0]).unwrap();
        assert_eq!(cs.iter().map(|c| c.size()).collect::<Vec<_>>(), vec![2, 2]);
        let top = partition(&d, &h, &[1]).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].size(), 4);
        assert!(matches!(partition(&d, &h, &[0, 0]), Err(Error::LevelCount { .. })));
    }

    #[test]
    fn k_anonymity_sizes() {
        let d = table(&["a", "a", "b", "b"], &["x", "y", "x", "y"]);
        let cs = partition(&d, &flat(&d), &[0]).unwrap();
        assert_eq!(check_k_anonymity(&cs, 2), KCheck { satisfied: true, min_class_size: 2 });
        assert!(!check_k_anonymity(&cs, 3).satisfied);
    }

    #[test]
    fn distinct_diversity_including_stomach_case() {
        let d = table(&["a", "a", "a"], &["flu", "flu", "cancer"]);
        let cs = partition(&d, &flat(&d), &[0]).unwrap();
        assert!(check_l_diversity(&cs, &d, "s", 2, DiversityVariant::Distinct).unwrap().satisfied);
        let d = table(&["a", "a", "a"], &["gastric ulcer", "gastritis", "stomach cancer"]);
        let cs = partition(&d, &flat(&d), &[0]).unwrap();
        assert!(check_l_diversity(&cs, &d, "s", 3, DiversityVariant::Distinct).unwrap().satisfied);
        assert!(matches!(
            check_l_diversity(&cs, &d, "q", 2, DiversityVariant::Distinct),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn uniform_entropy_diversity() {
        let d = table(&["a", "a", "a", "a"], &["w", "x", "y", "z"]);
        let cs = partition(&d, &flat(&d), &[0]).unwrap();
        let r = check_l_diversity(&cs, &d, "s", 4, DiversityVariant::Entropy).unwrap();
        assert!(r.satisfied);
        assert!((r.worst_value - ln(4.0)).abs() < 1e-12);
        assert!(!check_l_diversity(&cs, &d, "s", 5, DiversityVariant::Entropy).unwrap().satisfied);
    }

    #[test]
    fn emd_values() {
        let sup: Vec<String> = ["1", "2", "3"].iter().map(|s| s.to_string()).collect();
        let third = 1.0 / 3.0;
        let p = SensitiveDistribution::new("s", sup.clone(), vec![third, third, third]).unwrap();
        let q = SensitiveDistribution::new("s", sup.clone(), vec![1.0, 0.0, 0.0]).unwrap();
        assert!((emd(&p, &q, Ground::Ordered).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(emd(&p, &p, Ground::Ordered).unwrap(), 0.0);
        let two: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let a = SensitiveDistribution::new("s", two.clone(), vec![1.0, 0.0]).unwrap();
        let b = SensitiveDistribution::new("s", two, vec![0.0, 1.0]).unwrap();
        assert_eq!(emd(&a, &b, Ground::Equal).unwrap(), 1.0);
        assert_eq!(emd(&a, &p, Ground::Equal), Err(Error::SupportMismatch));
        assert_eq!(kl_divergence(&a, &b).unwrap(), f64::INFINITY);
        assert!(SensitiveDistribution::new("s", sup, vec![0.5, 0.4, 0.0]).is_err());
    }

    #[test]
    fn t_closeness_single_class_is_zero() {
        let d = table(&["a", "b", "c", "a"], &["x", "y", "x", "z"]);
        let cs = partition(&d, &flat(&d), &[1]).unwrap();
        for m in [DistanceMetric::EmdEqual, DistanceMetric::EmdOrdered, DistanceMetric::Kl] {
            let r = check_t_closeness(&cs, &d, "s", 0.01, m).unwrap();
            assert_eq!(r.worst_distance, 0.0);
            assert!(r.satisfied);
        }
    }

    #[test]
    fn t_closeness_identical_class_distributions() {
        let d = table(&["a", "a", "b", "b"], &["x", "y", "x", "y"]);
        let cs = partition(&d, &flat(&d), &[0]).unwrap();
        let r = check_t_closeness(&cs, &d, "s", 1e-6, DistanceMetric::EmdEqual).unwrap();
        assert_eq!(r.worst_distance, 0.0);
        assert!(r.satisfied);
    }

    #[test]
    fn lkc_basics() {
        let d = Dataset::new(
            vec![
                AttributeSchema::new("a", Role::QuasiIdentifier, Kind::Categorical),
                AttributeSchema::new("b", Role::QuasiIdentifier, Kind::Categorical),
            ],
            vec![
                vec![Value::text("x"), Value::text("p")],
                vec![Value::text("x"), Value::text("q")],
                vec![Value::text("y"), Value::text("p")],
                vec![Value::text("y"), Value::text("q")],
            ],
        )
        .unwrap();
        let hs: HierarchySet = [
            Hierarchy::flat("a", &d.distinct_labels(0)).unwrap(),
            Hierarchy::flat("b", &d.distinct_labels(1)).unwrap(),
        ]
        .into_iter()
        .collect();
        let one = check_lkc(&d, &hs, &[0, 0], 1, 2).unwrap();
        assert!(one.satisfied);
        let two = check_lkc(&d, &hs, &[0, 0], 2, 2).unwrap();
        assert!(!two.satisfied);
        assert_eq!(two.violating_subset, Some(vec!["a".to_string(), "b".to_string()]));
        assert!(check_lkc(&d, &hs, &[0, 0], 3, 2).is_err());
    }

    #[test]
    fn combinations_enumerate() {
        let all: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1]);
        assert_eq!(all[5], vec![2, 3]);
        assert_eq!(Combinations::new(3, 3).count(), 1);
    }
}
