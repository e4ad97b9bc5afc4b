//! Lattice search for the utility-optimal full-domain generalization.
//!
//! Records are first compressed into micro-classes (records with identical
//! leaf tuples) which are the unit of both grouping and record-level
//! suppression. A node is evaluated by mapping every micro-class to its
//! generalized tuple, grouping, and checking each constraint per class. Nodes
//! whose classes violate a constraint may still be feasible if removing the
//! violating records stays within the suppression limit and the residual
//! table passes a re-check.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::hierarchy::{Hierarchy, HierarchySet};
use crate::lattice::{node_id, Lattice, LatticeNode, NodeStatus, DEFAULT_LATTICE_CAP};
use crate::math::{binomial, ln};
use crate::privacy::{
    self, check_k_anonymity, check_l_diversity, check_lkc_release, check_t_closeness, default_ground, emd_slices,
    kl_slices, partition_release, sensitive_support, Combinations, DistanceMetric, DiversityVariant, Ground,
    PrivacyConstraint, LKC_SUBSET_CAP, THRESHOLD_EPS,
};
use crate::utility::UtilityReport;
use crate::{Error, Result};

/// Utilities closer than this are treated as tied.
pub const UTILITY_TIE_EPS: f64 = 1e-12;

/// Outcome of one constraint at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintOutcome {
    pub model: String,
    pub satisfied: bool,
    /// Minimum class size, distinct count, entropy, distance or LKC group size.
    pub value: f64,
}

/// A node evaluated against the constraints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub levels: Vec<usize>,
    pub feasible: bool,
    pub suppressed_indices: Vec<usize>,
    pub utility: UtilityReport,
    pub classes: usize,
    pub min_class_size: usize,
    /// Outcomes before suppression.
    pub constraints: Vec<ConstraintOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Candidate {
    pub fn id(&self) -> String {
        node_id(&self.levels)
    }

    /// Worst t-closeness distance among the constraints, if any.
    pub fn worst_distance(&self) -> Option<f64> {
        self.constraints
            .iter()
            .filter(|c| c.model.starts_with("t-closeness"))
            .map(|c| c.value)
            .reduce(f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnonymizationResult {
    pub chosen_node: LatticeNode,
    #[serde(skip)]
    pub output: Dataset,
    pub suppressed_indices: Vec<usize>,
    pub utility_report: UtilityReport,
    pub candidate: Candidate,
    pub evaluated_count: usize,
    pub pruned_count: usize,
    pub lattice: Vec<LatticeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unsatisfiable {
    pub top: Candidate,
    pub evaluated_count: usize,
    pub pruned_count: usize,
    pub lattice: Vec<LatticeNode>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found(AnonymizationResult),
    Unsatisfiable(Unsatisfiable),
}

impl SearchOutcome {
    pub fn found(self) -> Option<AnonymizationResult> {
        match self {
            SearchOutcome::Found(r) => Some(r),
            SearchOutcome::Unsatisfiable(_) => None,
        }
    }

    pub fn lattice(&self) -> &[LatticeNode] {
        match self {
            SearchOutcome::Found(r) => &r.lattice,
            SearchOutcome::Unsatisfiable(u) => &u.lattice,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub suppression_limit: f64,
    pub prune: bool,
    pub lattice_cap: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            suppression_limit: 0.0,
            prune: true,
            lattice_cap: DEFAULT_LATTICE_CAP,
        }
    }
}

/// Evaluates one lattice node.
pub fn apply_transformation(
    dataset: &Dataset,
    hierarchies: &HierarchySet,
    levels: &[usize],
    constraints: &[PrivacyConstraint],
    suppression_limit: f64,
) -> Result<Candidate> {
    Anonymizer::new(dataset, hierarchies, constraints)?.evaluate(levels, suppression_limit)
}

/// Searches the whole lattice for the feasible node of highest utility.
pub fn search_optimal(
    dataset: &Dataset,
    hierarchies: &HierarchySet,
    constraints: &[PrivacyConstraint],
    suppression_limit: f64,
    prune: bool,
) -> Result<SearchOutcome> {
    Anonymizer::new(dataset, hierarchies, constraints)?.search(SearchOptions {
        suppression_limit,
        prune,
        ..SearchOptions::default()
    })
}

/// Generalizes every QID cell to `levels` and drops `suppressed` rows.
pub fn materialize(
    dataset: &Dataset,
    hierarchies: &HierarchySet,
    levels: &[usize],
    suppressed: &[usize],
) -> Result<Dataset> {
    let qids = dataset.qid_indices();
    if levels.len() != qids.len() {
        return Err(Error::LevelCount {
            found: levels.len(),
            expected: qids.len(),
        });
    }
    let hs = hierarchies.for_qids(dataset)?;
    let mut drop = vec![false; dataset.len()];
    for &s in suppressed {
        drop[s] = true;
    }
    let mut records = Vec::with_capacity(dataset.len() - suppressed.len());
    for (i, rec) in dataset.records().iter().enumerate() {
        if drop[i] {
            continue;
        }
        let mut out = rec.clone();
        for ((&q, h), &l) in qids.iter().zip(&hs).zip(levels) {
            out[q] = h.generalize_value(&rec[q], l)?;
        }
        records.push(out);
    }
    Ok(Dataset::from_parts(dataset.schema().to_vec(), records))
}

/// Re-checks a release against constraints with the public, label-based
/// checks (no hierarchy codes involved).
pub fn audit_release(release: &Dataset, constraints: &[PrivacyConstraint]) -> Result<Vec<ConstraintOutcome>> {
    let classes = partition_release(release);
    constraints
        .iter()
        .map(|c| {
            let (satisfied, value) = match c {
                PrivacyConstraint::KAnonymity { k } => {
                    let r = check_k_anonymity(&classes, *k);
                    (r.satisfied, r.min_class_size as f64)
                }
                PrivacyConstraint::LDiversityDistinct { l, sensitive } => {
                    let r = check_l_diversity(&classes, release, sensitive, *l, DiversityVariant::Distinct)?;
                    (r.satisfied, r.worst_value)
                }
                PrivacyConstraint::LDiversityEntropy { l, sensitive } => {
                    let r = check_l_diversity(&classes, release, sensitive, *l, DiversityVariant::Entropy)?;
                    (r.satisfied, r.worst_value)
                }
                PrivacyConstraint::TClosenessEmd { t, sensitive, ground } => {
                    let idx = release.attribute_index(sensitive)?;
                    let metric = match ground.unwrap_or_else(|| default_ground(release, idx)) {
                        Ground::Ordered => DistanceMetric::EmdOrdered,
                        Ground::Equal => DistanceMetric::EmdEqual,
                    };
                    let r = check_t_closeness(&classes, release, sensitive, *t, metric)?;
                    (r.satisfied, r.worst_distance)
                }
                PrivacyConstraint::TClosenessKl { t, sensitive } => {
                    let r = check_t_closeness(&classes, release, sensitive, *t, DistanceMetric::Kl)?;
                    (r.satisfied, r.worst_distance)
                }
                PrivacyConstraint::Lkc { l, k } => {
                    let r = check_lkc_release(release, *l, *k)?;
                    (r.satisfied, r.min_group_size as f64)
                }
            };
            Ok(ConstraintOutcome {
                model: model_name(c),
                satisfied,
                value,
            })
        })
        .collect()
}

pub fn model_name(c: &PrivacyConstraint) -> String {
    match c {
        PrivacyConstraint::KAnonymity { k } => format!("k-anonymity(k={k})"),
        PrivacyConstraint::LDiversityDistinct { l, sensitive } => format!("l-diversity-distinct(l={l},{sensitive})"),
        PrivacyConstraint::LDiversityEntropy { l, sensitive } => format!("l-diversity-entropy(l={l},{sensitive})"),
        PrivacyConstraint::TClosenessEmd { t, sensitive, .. } => format!("t-closeness-emd(t={t},{sensitive})"),
        PrivacyConstraint::TClosenessKl { t, sensitive } => format!("t-closeness-kl(t={t},{sensitive})"),
        PrivacyConstraint::Lkc { l, k } => format!("lkc(L={l},K={k})"),
    }
}

/// Thresholds per constraint, resolved against the dataset.
enum Check {
    K(usize),
    Distinct { sa: usize, l: usize },
    Entropy { sa: usize, threshold: f64 },
    Distance { sa: usize, t: f64, metric: DistanceMetric },
    Lkc { k: usize },
}

struct SensitiveColumn {
    /// Per micro-class sparse histogram `(support position, count)`.
    hist: Vec<Vec<(u32, u32)>>,
    support_len: usize,
}

/// Precomputed state for evaluating many nodes of one problem.
pub struct Anonymizer<'a> {
    dataset: &'a Dataset,
    hierarchies: &'a HierarchySet,
    constraints: Vec<PrivacyConstraint>,
    checks: Vec<Check>,
    qid_names: Vec<String>,
    heights: Vec<usize>,
    /// `levels_table[q][level][leaf position]` = node position within that level.
    levels_table: Vec<Vec<Vec<u32>>>,
    /// `loss_table[q][level][node position]`.
    loss_table: Vec<Vec<Vec<f64>>>,
    level_sizes: Vec<Vec<u64>>,
    /// `loss_sum[q][level]`: total loss of attribute `q` over all records.
    loss_sum: Vec<Vec<f64>>,
    /// Leaf positions of micro-class `m` at `micro_leaves[m * qids + q]`.
    micro_leaves: Vec<u32>,
    /// `micro_codes[q][level][m]` = node position of micro-class `m` at that level.
    micro_codes: Vec<Vec<Vec<u32>>>,
    micro_count: Vec<u32>,
    micro_records: Vec<Vec<u32>>,
    micro_of_record: Vec<u32>,
    sensitive: Vec<(usize, SensitiveColumn)>,
    lkc_subsets: Vec<Vec<usize>>,
    n: usize,
}

struct Grouping {
    /// Class of each micro-class, `u32::MAX` when inactive.
    class_of: Vec<u32>,
    class_size: Vec<u64>,
}

/// Active micro-classes bucketed by class.
struct Members {
    offsets: Vec<u32>,
    flat: Vec<u32>,
}

impl Members {
    fn of(&self, c: usize) -> &[u32] {
        &self.flat[self.offsets[c] as usize..self.offsets[c + 1] as usize]
    }
}

impl Grouping {
    fn members(&self) -> Members {
        let classes = self.class_size.len();
        let mut offsets = vec![0u32; classes + 1];
        for &c in &self.class_of {
            if c != u32::MAX {
                offsets[c as usize + 1] += 1;
            }
        }
        for c in 0..classes {
            offsets[c + 1] += offsets[c];
        }
        let mut fill = offsets.clone();
        let mut flat = vec![0u32; offsets[classes] as usize];
        for (mi, &c) in self.class_of.iter().enumerate() {
            if c != u32::MAX {
                flat[fill[c as usize] as usize] = mi as u32;
                fill[c as usize] += 1;
            }
        }
        Members { offsets, flat }
    }

    /// Flags the active micro-classes of every class marked in `bad`.
    fn mark(&self, bad: &[bool], violating: &mut [bool]) {
        for (mi, &c) in self.class_of.iter().enumerate() {
            if c != u32::MAX && bad[c as usize] {
                violating[mi] = true;
            }
        }
    }
}

struct NodeCheck {
    outcomes: Vec<ConstraintOutcome>,
    /// Micro-classes in violating classes or LKC groups.
    violating: Vec<bool>,
    grouping: Grouping,
}

impl<'a> Anonymizer<'a> {
    pub fn new(dataset: &'a Dataset, hierarchies: &'a HierarchySet, constraints: &[PrivacyConstraint]) -> Result<Self> {
        for c in constraints {
            c.validate(dataset)?;
        }
        let qids = dataset.qid_indices();
        if qids.is_empty() {
            return Err(Error::Constraint("no quasi-identifier in schema".into()));
        }
        let hs: Vec<&Hierarchy> = hierarchies.for_qids(dataset)?;
        let m = qids.len();

        let mut levels_table = Vec::with_capacity(m);
        let mut loss_table = Vec::with_capacity(m);
        let mut level_sizes = Vec::with_capacity(m);
        for h in &hs {
            let mut pos_in_level = vec![0u32; h.nodes().len()];
            for l in 0..=h.height() {
                for (p, &n) in h.level_nodes(l).iter().enumerate() {
                    pos_in_level[n] = p as u32;
                }
            }
            let leaves = h.level_nodes(0);
            let mut per_level: Vec<Vec<u32>> = Vec::with_capacity(h.height() + 1);
            let mut losses = Vec::with_capacity(h.height() + 1);
            let mut sizes = Vec::with_capacity(h.height() + 1);
            for l in 0..=h.height() {
                per_level.push(leaves.iter().map(|&leaf| pos_in_level[h.ancestor(leaf, l)]).collect());
                losses.push(h.level_nodes(l).iter().map(|&n| h.node_loss(n)).collect());
                sizes.push(h.level_nodes(l).len() as u64);
            }
            levels_table.push(per_level);
            loss_table.push(losses);
            level_sizes.push(sizes);
        }

        // micro-classes in order of first record
        let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut micro_leaves = Vec::new();
        let mut micro_count = Vec::new();
        let mut micro_records: Vec<Vec<u32>> = Vec::new();
        let mut micro_of_record = Vec::with_capacity(dataset.len());
        let pos_cache: Vec<BTreeMap<String, u32>> = hs
            .iter()
            .map(|h| {
                h.level_nodes(0)
                    .iter()
                    .enumerate()
                    .map(|(p, &n)| (h.node(n).label.clone(), p as u32))
                    .collect()
            })
            .collect();
        for (r, rec) in dataset.records().iter().enumerate() {
            let mut tuple = Vec::with_capacity(m);
            for (qi, &q) in qids.iter().enumerate() {
                let label = rec[q].label();
                let p = *pos_cache[qi].get(label.as_ref()).ok_or_else(|| Error::UnknownLeaf {
                    attribute: hs[qi].attribute().to_string(),
                    value: label.into_owned(),
                })?;
                tuple.push(p);
            }
            let id = match index.get(&tuple) {
                Some(&id) => id,
                None => {
                    let id = micro_count.len() as u32;
                    micro_leaves.extend_from_slice(&tuple);
                    micro_count.push(0);
                    micro_records.push(Vec::new());
                    index.insert(tuple, id);
                    id
                }
            };
            micro_count[id as usize] += 1;
            micro_records[id as usize].push(r as u32);
            micro_of_record.push(id);
        }

        let mut sensitive: Vec<(usize, SensitiveColumn)> = Vec::new();
        let mut checks = Vec::with_capacity(constraints.len());
        let mut lkc_l = 0usize;
        for c in constraints {
            let mut sa_col = |name: &str| -> Result<usize> {
                let idx = privacy::require_sensitive(dataset, name)?;
                if !sensitive.iter().any(|(i, _)| *i == idx) {
                    sensitive.push((idx, Self::sensitive_column(dataset, idx, &micro_records)));
                }
                Ok(idx)
            };
            checks.push(match c {
                PrivacyConstraint::KAnonymity { k } => Check::K(*k),
                PrivacyConstraint::LDiversityDistinct { l, sensitive } => Check::Distinct {
                    sa: sa_col(sensitive)?,
                    l: *l,
                },
                PrivacyConstraint::LDiversityEntropy { l, sensitive } => Check::Entropy {
                    sa: sa_col(sensitive)?,
                    threshold: ln(*l as f64),
                },
                PrivacyConstraint::TClosenessEmd { t, sensitive, ground } => {
                    let sa = sa_col(sensitive)?;
                    let metric = match ground.unwrap_or_else(|| default_ground(dataset, sa)) {
                        Ground::Ordered => DistanceMetric::EmdOrdered,
                        Ground::Equal => DistanceMetric::EmdEqual,
                    };
                    Check::Distance { sa, t: *t, metric }
                }
                PrivacyConstraint::TClosenessKl { t, sensitive } => Check::Distance {
                    sa: sa_col(sensitive)?,
                    t: *t,
                    metric: DistanceMetric::Kl,
                },
                PrivacyConstraint::Lkc { l, k } => {
                    if lkc_l != 0 && lkc_l != *l {
                        return Err(Error::Constraint("all LKC constraints must share one L".into()));
                    }
                    lkc_l = *l;
                    Check::Lkc { k: *k }
                }
            });
        }
        let mut lkc_subsets = Vec::new();
        if lkc_l > 0 {
            let count = binomial(m, lkc_l);
            if count > LKC_SUBSET_CAP {
                return Err(Error::TooManySubsets {
                    count,
                    l: lkc_l,
                    cap: LKC_SUBSET_CAP,
                });
            }
            for size in 1..=lkc_l {
                lkc_subsets.extend(Combinations::new(m, size));
            }
        }

        let micros = micro_count.len();
        let micro_codes: Vec<Vec<Vec<u32>>> = (0..m)
            .map(|q| {
                levels_table[q]
                    .iter()
                    .map(|table| (0..micros).map(|mi| table[micro_leaves[mi * m + q] as usize]).collect())
                    .collect()
            })
            .collect();
        let mut anonymizer = Anonymizer {
            dataset,
            hierarchies,
            constraints: constraints.to_vec(),
            checks,
            qid_names: qids.iter().map(|&q| dataset.schema()[q].name.clone()).collect(),
            heights: hs.iter().map(|h| h.height()).collect(),
            levels_table,
            loss_table,
            level_sizes,
            micro_codes,
            micro_leaves,
            micro_count,
            micro_records,
            micro_of_record,
            sensitive,
            lkc_subsets,
            loss_sum: Vec::new(),
            n: dataset.len(),
        };
        anonymizer.loss_sum = (0..m)
            .map(|q| (0..=anonymizer.heights[q]).map(|l| anonymizer.attribute_total(q, l, None)).collect())
            .collect();
        Ok(anonymizer)
    }

    /// Sum of cell losses of attribute `q` at `level`. Every caller sums in
    /// micro-class order, so a suppressed variant never comes out below the
    /// unsuppressed one.
    fn attribute_total(&self, q: usize, level: usize, suppressed: Option<&[bool]>) -> f64 {
        let m = self.heights.len();
        let table = &self.levels_table[q][level];
        let losses = &self.loss_table[q][level];
        let mut total = 0.0;
        for mi in 0..self.micro_count.len() {
            let cell = match suppressed {
                Some(s) if s[mi] => 1.0,
                _ => losses[table[self.micro_leaves[mi * m + q] as usize] as usize],
            };
            total += self.micro_count[mi] as f64 * cell;
        }
        total
    }

    fn sensitive_column(dataset: &Dataset, idx: usize, micro_records: &[Vec<u32>]) -> SensitiveColumn {
        let support = sensitive_support(dataset, idx, 0..dataset.len());
        let pos: BTreeMap<&str, u32> = support.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();
        let hist = micro_records
            .iter()
            .map(|recs| {
                let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
                for &r in recs {
                    *counts.entry(pos[dataset.value(r as usize, idx).label().as_ref()]).or_insert(0) += 1;
                }
                counts.into_iter().collect()
            })
            .collect();
        SensitiveColumn {
            hist,
            support_len: support.len(),
        }
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn qid_names(&self) -> &[String] {
        &self.qid_names
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    pub fn micro_class_count(&self) -> usize {
        self.micro_count.len()
    }

    pub fn lattice(&self, cap: u64) -> Result<Lattice> {
        Lattice::new(&self.heights, cap)
    }

    fn check_levels(&self, levels: &[usize]) -> Result<()> {
        if levels.len() != self.heights.len() {
            return Err(Error::LevelCount {
                found: levels.len(),
                expected: self.heights.len(),
            });
        }
        for (i, (&l, &h)) in levels.iter().zip(&self.heights).enumerate() {
            if l > h {
                return Err(Error::LevelOutOfRange {
                    attribute: self.qid_names[i].clone(),
                    level: l,
                    height: h,
                });
            }
        }
        Ok(())
    }

    fn group(&self, levels: &[usize], attrs: &[usize], active: Option<&[bool]>) -> Grouping {
        let micros = self.micro_count.len();
        let mut class_of = vec![u32::MAX; micros];
        let mut class_size: Vec<u64> = Vec::new();

        let mut radix_fits = true;
        let mut span: u64 = 1;
        for &q in attrs {
            match span.checked_mul(self.level_sizes[q][levels[q]]) {
                Some(s) => span = s,
                None => radix_fits = false,
            }
        }
        let codes: Vec<&[u32]> = attrs.iter().map(|&q| self.micro_codes[q][levels[q]].as_slice()).collect();

        if radix_fits {
            let strides: Vec<u64> = {
                let mut s = vec![1u64; attrs.len()];
                for i in (0..attrs.len().saturating_sub(1)).rev() {
                    s[i] = s[i + 1] * self.level_sizes[attrs[i + 1]][levels[attrs[i + 1]]];
                }
                s
            };
            let mut index: HashMap<u64, u32> = HashMap::with_capacity(micros / 2 + 1);
            for mi in 0..micros {
                if let Some(a) = active {
                    if !a[mi] {
                        continue;
                    }
                }
                let mut key = 0u64;
                for (code, stride) in codes.iter().zip(&strides) {
                    key += code[mi] as u64 * stride;
                }
                let c = *index.entry(key).or_insert_with(|| {
                    class_size.push(0);
                    (class_size.len() - 1) as u32
                });
                class_of[mi] = c;
                class_size[c as usize] += self.micro_count[mi] as u64;
            }
        } else {
            let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
            for mi in 0..micros {
                if let Some(a) = active {
                    if !a[mi] {
                        continue;
                    }
                }
                let key: Vec<u32> = codes.iter().map(|code| code[mi]).collect();
                let next = class_size.len() as u32;
                let c = *index.entry(key).or_insert(next);
                if c == next {
                    class_size.push(0);
                }
                class_of[mi] = c;
                class_size[c as usize] += self.micro_count[mi] as u64;
            }
        }
        Grouping { class_of, class_size }
    }

    fn check_node(&self, levels: &[usize], active: Option<&[bool]>) -> NodeCheck {
        let all: Vec<usize> = (0..self.heights.len()).collect();
        let grouping = self.group(levels, &all, active);
        let micros = self.micro_count.len();
        let mut violating = vec![false; micros];
        let mut outcomes = Vec::with_capacity(self.checks.len());
        let classes = grouping.class_size.len();
        let needs_members = self.checks.iter().any(|c| !matches!(c, Check::K(_) | Check::Lkc { .. }));
        let members = if needs_members { Some(grouping.members()) } else { None };

        // global SA counts over the active records, per sensitive column
        let globals: Vec<Vec<u64>> = self
            .sensitive
            .iter()
            .map(|(_, col)| {
                let mut g = vec![0u64; col.support_len];
                for (mi, h) in col.hist.iter().enumerate() {
                    if grouping.class_of[mi] == u32::MAX {
                        continue;
                    }
                    for &(p, c) in h {
                        g[p as usize] += c as u64;
                    }
                }
                g
            })
            .collect();

        for (check, constraint) in self.checks.iter().zip(&self.constraints) {
            let mut bad_class = vec![false; classes];
            let (satisfied, value) = match check {
                Check::K(k) => {
                    let mut min = u64::MAX;
                    for (c, &s) in grouping.class_size.iter().enumerate() {
                        min = min.min(s);
                        bad_class[c] = s < *k as u64;
                    }
                    let min = if classes == 0 { 0 } else { min };
                    (classes > 0 && min >= *k as u64, min as f64)
                }
                Check::Distinct { sa, l } => {
                    let col = self.sensitive_col(*sa);
                    let mut worst = f64::INFINITY;
                    let mut scratch = vec![0u64; col.support_len];
                    for c in 0..classes {
                        let distinct = self.class_hist(members.as_ref().expect("built").of(c), col, &mut scratch, |_, _| ()) as f64;
                        worst = worst.min(distinct);
                        bad_class[c] = distinct < *l as f64;
                    }
                    (classes > 0 && worst >= *l as f64, if classes == 0 { 0.0 } else { worst })
                }
                Check::Entropy { sa, threshold } => {
                    let col = self.sensitive_col(*sa);
                    let mut worst = f64::INFINITY;
                    let mut scratch = vec![0u64; col.support_len];
                    for c in 0..classes {
                        let size = grouping.class_size[c];
                        let mut acc = 0.0;
                        self.class_hist(members.as_ref().expect("built").of(c), col, &mut scratch, |_, cnt| {
                            let p = cnt as f64 / size as f64;
                            acc += p * ln(p);
                        });
                        let e = -acc;
                        worst = worst.min(e);
                        bad_class[c] = e + THRESHOLD_EPS < *threshold;
                    }
                    (
                        classes > 0 && worst + THRESHOLD_EPS >= *threshold,
                        if classes == 0 { 0.0 } else { worst },
                    )
                }
                Check::Distance { sa, t, metric } => {
                    let si = self.sensitive.iter().position(|(i, _)| i == sa).expect("registered");
                    let col = &self.sensitive[si].1;
                    let global = &globals[si];
                    // restrict the support to values present in the active table
                    let present: Vec<usize> = (0..global.len()).filter(|&p| global[p] > 0).collect();
                    let mut slot = vec![usize::MAX; global.len()];
                    for (i, &p) in present.iter().enumerate() {
                        slot[p] = i;
                    }
                    let total: u64 = global.iter().sum();
                    let q: Vec<f64> = present.iter().map(|&p| global[p] as f64 / total as f64).collect();
                    let mut worst = 0.0f64;
                    let mut scratch = vec![0u64; col.support_len];
                    let mut p = vec![0.0f64; present.len()];
                    for c in 0..classes {
                        let size = grouping.class_size[c] as f64;
                        p.iter_mut().for_each(|x| *x = 0.0);
                        self.class_hist(members.as_ref().expect("built").of(c), col, &mut scratch, |pos, cnt| {
                            p[slot[pos]] = cnt as f64 / size;
                        });
                        let d = match metric {
                            DistanceMetric::EmdOrdered => emd_slices(&p, &q, Ground::Ordered),
                            DistanceMetric::EmdEqual => emd_slices(&p, &q, Ground::Equal),
                            DistanceMetric::Kl => kl_slices(&p, &q),
                        };
                        worst = worst.max(d);
                        bad_class[c] = d > *t + THRESHOLD_EPS;
                    }
                    (classes > 0 && worst <= *t + THRESHOLD_EPS, worst)
                }
                Check::Lkc { k } => {
                    let mut min = u64::MAX;
                    let mut ok = classes > 0;
                    for subset in &self.lkc_subsets {
                        let g = self.group(levels, subset, active);
                        let bad: Vec<bool> = g.class_size.iter().map(|&s| s < *k as u64).collect();
                        min = g.class_size.iter().copied().fold(min, u64::min);
                        if bad.iter().any(|&b| b) {
                            ok = false;
                            g.mark(&bad, &mut violating);
                        }
                    }
                    (ok, if classes == 0 { 0.0 } else { min as f64 })
                }
            };
            grouping.mark(&bad_class, &mut violating);
            outcomes.push(ConstraintOutcome {
                model: model_name(constraint),
                satisfied,
                value,
            });
        }
        NodeCheck {
            outcomes,
            violating,
            grouping,
        }
    }

    fn sensitive_col(&self, sa: usize) -> &SensitiveColumn {
        &self.sensitive.iter().find(|(i, _)| *i == sa).expect("registered").1
    }

    /// Accumulates the class histogram in `scratch`, calls `each` with
    /// `(support position, count)` in support order and returns the number
    /// of distinct values. `scratch` is left zeroed.
    fn class_hist(&self, micros: &[u32], col: &SensitiveColumn, scratch: &mut [u64], mut each: impl FnMut(usize, u64)) -> usize {
        let mut touched: Vec<u32> = Vec::new();
        for &mi in micros {
            for &(p, c) in &col.hist[mi as usize] {
                if scratch[p as usize] == 0 {
                    touched.push(p);
                }
                scratch[p as usize] += c as u64;
            }
        }
        touched.sort_unstable();
        for &p in &touched {
            each(p as usize, scratch[p as usize]);
            scratch[p as usize] = 0;
        }
        touched.len()
    }

    /// Per-attribute loss sums and the utility report for a node where the
    /// micro-classes flagged in `suppressed` are removed.
    fn utility(&self, levels: &[usize], suppressed: Option<&[bool]>, grouping: Option<&Grouping>) -> UtilityReport {
        let m = self.heights.len();
        let n = self.n as f64;
        let mut per_attribute_loss = BTreeMap::new();
        let mut sum = 0.0;
        let mut suppressed_records = 0u64;
        if let Some(s) = suppressed {
            for (mi, &x) in s.iter().enumerate() {
                if x {
                    suppressed_records += self.micro_count[mi] as u64;
                }
            }
        }
        for q in 0..m {
            let total = match suppressed {
                Some(_) => self.attribute_total(q, levels[q], suppressed),
                None => self.loss_sum[q][levels[q]],
            };
            let l = total / n;
            sum += l;
            per_attribute_loss.insert(self.qid_names[q].clone(), l);
        }
        let discernability = grouping
            .map(|g| g.class_size.iter().map(|s| s * s).sum::<u64>())
            .unwrap_or(0)
            + suppressed_records * self.n as u64;
        UtilityReport {
            per_attribute_loss,
            utility: 1.0 - sum / m as f64,
            discernability,
            suppressed_fraction: suppressed_records as f64 / n,
        }
    }

    /// Utility of a node without suppression; an upper bound on the node's
    /// utility under any suppression.
    pub fn utility_bound(&self, levels: &[usize]) -> f64 {
        self.utility(levels, None, None).utility
    }

    /// Evaluates one node with record-level suppression of violating classes.
    pub fn evaluate(&self, levels: &[usize], suppression_limit: f64) -> Result<Candidate> {
        self.check_levels(levels)?;
        if !(0.0..=1.0).contains(&suppression_limit) {
            return Err(Error::Invalid(format!("suppression limit {suppression_limit} outside [0, 1]")));
        }
        let first = self.check_node(levels, None);
        let classes = first.grouping.class_size.len();
        let min_class_size = first.grouping.class_size.iter().copied().min().unwrap_or(0) as usize;
        let violating_records: u64 = first
            .violating
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(mi, _)| self.micro_count[mi] as u64)
            .sum();

        let mut candidate = Candidate {
            levels: levels.to_vec(),
            feasible: false,
            suppressed_indices: Vec::new(),
            utility: UtilityReport {
                per_attribute_loss: BTreeMap::new(),
                utility: 0.0,
                discernability: 0,
                suppressed_fraction: 0.0,
            },
            classes,
            min_class_size,
            constraints: first.outcomes.clone(),
            reason: None,
        };

        if violating_records == 0 {
            candidate.feasible = true;
            candidate.utility = self.utility(levels, None, Some(&first.grouping));
            return Ok(candidate);
        }
        let fraction = violating_records as f64 / self.n as f64;
        if fraction > suppression_limit {
            candidate.reason = Some(format!(
                "{violating_records} of {} records violate; suppression limit {suppression_limit}",
                self.n
            ));
            // nothing is suppressed on an over-limit node
            candidate.utility = self.utility(levels, None, Some(&first.grouping));
            return Ok(candidate);
        }
        if violating_records as usize == self.n {
            candidate.reason = Some("every record would be suppressed".into());
            candidate.utility = self.utility(levels, None, Some(&first.grouping));
            return Ok(candidate);
        }
        let active: Vec<bool> = first.violating.iter().map(|v| !v).collect();
        let second = self.check_node(levels, Some(&active));
        candidate.utility = self.utility(levels, Some(&first.violating), Some(&second.grouping));
        candidate.suppressed_indices = self.records_of(&first.violating);
        if second.outcomes.iter().all(|o| o.satisfied) {
            candidate.feasible = true;
        } else {
            candidate.reason = Some("residual table fails the re-check after suppression".into());
        }
        Ok(candidate)
    }

    fn records_of(&self, micros: &[bool]) -> Vec<usize> {
        let mut out: Vec<usize> = micros
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .flat_map(|(mi, _)| self.micro_records[mi].iter().map(|&r| r as usize))
            .collect();
        out.sort_unstable();
        out
    }

    /// Micro-class of each record, for callers grouping records themselves.
    pub fn micro_of_record(&self) -> &[u32] {
        &self.micro_of_record
    }

    pub fn materialize(&self, candidate: &Candidate) -> Result<Dataset> {
        materialize(self.dataset, self.hierarchies, &candidate.levels, &candidate.suppressed_indices)
    }

    /// Full lattice search.
    pub fn search(&self, options: SearchOptions) -> Result<SearchOutcome> {
        let lattice = self.lattice(options.lattice_cap)?;
        let limit = options.suppression_limit;
        if !(0.0..=1.0).contains(&limit) {
            return Err(Error::Invalid(format!("suppression limit {limit} outside [0, 1]")));
        }
        // without suppression utility is a function of the levels alone, so
        // the bound is exact and monotone constraints allow closure pruning
        let monotone = options.prune && limit == 0.0 && self.constraints.iter().all(|c| c.is_monotone());
        let bound_prune = monotone;

        let len = lattice.len();
        let mut nodes = lattice.nodes();
        let bounds: Vec<f64> = (0..len).map(|i| self.utility_bound(&nodes[i].levels)).collect();
        let mut implied = vec![false; len];
        let mut evaluated: Vec<Option<Candidate>> = vec![None; len];
        let mut best: Option<(f64, usize)> = None;
        let mut evaluated_count = 0usize;

        for layer in lattice.layers() {
            let mut todo = Vec::new();
            for &i in &layer {
                if nodes[i].status != NodeStatus::Unevaluated {
                    continue;
                }
                if let (true, Some((bu, bi))) = (bound_prune, best) {
                    if bounds[i] < bu - UTILITY_TIE_EPS {
                        nodes[i].status = NodeStatus::Pruned;
                        nodes[i].pruned_by = Some(nodes[bi].id.clone());
                        nodes[i].utility = Some(bounds[i]);
                        continue;
                    }
                }
                todo.push(i);
            }
            let results = self.evaluate_many(&todo, &nodes, limit)?;
            for (i, cand) in todo.into_iter().zip(results) {
                evaluated_count += 1;
                nodes[i].status = NodeStatus::Evaluated;
                nodes[i].satisfied = Some(cand.feasible);
                nodes[i].utility = Some(cand.utility.utility);
                if cand.feasible {
                    let u = cand.utility.utility;
                    if best.map(|(bu, _)| u > bu).unwrap_or(true) {
                        best = Some((u, i));
                    }
                    if monotone {
                        self.mark_implied(&lattice, &mut nodes, &mut implied, &bounds, i);
                    }
                } else if monotone {
                    mark_infeasible_below(&lattice, &mut nodes, i);
                }
                evaluated[i] = Some(cand);
            }
        }

        let pruned_count = nodes.iter().filter(|n| n.status == NodeStatus::Pruned).count();
        let chosen = select_optimum(&lattice, &nodes);
        match chosen {
            None => {
                let top = match evaluated[lattice.top()].take() {
                    Some(c) => c,
                    None => self.evaluate(&nodes[lattice.top()].levels, limit)?,
                };
                Ok(SearchOutcome::Unsatisfiable(Unsatisfiable {
                    top,
                    evaluated_count,
                    pruned_count,
                    lattice: nodes,
                }))
            }
            Some(i) => {
                let candidate = match evaluated[i].take() {
                    Some(c) => c,
                    None => self.evaluate(&nodes[i].levels, limit)?,
                };
                debug_assert!(candidate.feasible);
                let output = self.materialize(&candidate)?;
                let audit = audit_release(&output, &self.constraints)?;
                if let Some(bad) = audit.iter().find(|o| !o.satisfied) {
                    return Err(Error::Invalid(format!(
                        "self-audit failed for node {}: {} = {}",
                        nodes[i].id, bad.model, bad.value
                    )));
                }
                Ok(SearchOutcome::Found(AnonymizationResult {
                    chosen_node: nodes[i].clone(),
                    output,
                    suppressed_indices: candidate.suppressed_indices.clone(),
                    utility_report: candidate.utility.clone(),
                    candidate,
                    evaluated_count,
                    pruned_count,
                    lattice: nodes,
                }))
            }
        }
    }

    #[cfg(feature = "parallel")]
    fn evaluate_many(&self, todo: &[usize], nodes: &[LatticeNode], limit: f64) -> Result<Vec<Candidate>> {
        use rayon::prelude::*;
        todo.par_iter().map(|&i| self.evaluate(&nodes[i].levels, limit)).collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn evaluate_many(&self, todo: &[usize], nodes: &[LatticeNode], limit: f64) -> Result<Vec<Candidate>> {
        todo.iter().map(|&i| self.evaluate(&nodes[i].levels, limit)).collect()
    }

    fn mark_implied(&self, lattice: &Lattice, nodes: &mut [LatticeNode], implied: &mut [bool], bounds: &[f64], from: usize) {
        let by = nodes[from].id.clone();
        let mut stack = lattice.successors(from);
        while let Some(s) = stack.pop() {
            if implied[s] {
                continue;
            }
            implied[s] = true;
            if nodes[s].status != NodeStatus::Evaluated {
                nodes[s].status = NodeStatus::Pruned;
                nodes[s].satisfied = Some(true);
                // exact: without suppression utility depends on levels only
                nodes[s].utility = Some(bounds[s]);
                nodes[s].pruned_by = Some(by.clone());
            }
            stack.extend(lattice.successors(s));
        }
    }
}

fn mark_infeasible_below(lattice: &Lattice, nodes: &mut [LatticeNode], from: usize) {
    let by = nodes[from].id.clone();
    let mut stack = lattice.predecessors(from);
    while let Some(p) = stack.pop() {
        if nodes[p].status != NodeStatus::Unevaluated {
            continue;
        }
        nodes[p].status = NodeStatus::Pruned;
        nodes[p].satisfied = Some(false);
        nodes[p].pruned_by = Some(by.clone());
        stack.extend(lattice.predecessors(p));
    }
}

/// Highest-utility feasible node; ties (within [`UTILITY_TIE_EPS`]) go to
/// the smallest level sum, then the lexicographically smallest levels.
pub fn select_optimum(lattice: &Lattice, nodes: &[LatticeNode]) -> Option<usize> {
    let feasible: Vec<(usize, f64)> = nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.satisfied == Some(true))
        .filter_map(|(i, n)| n.utility.map(|u| (i, u)))
        .collect();
    let max = feasible.iter().map(|&(_, u)| u).reduce(f64::max)?;
    feasible
        .into_iter()
        .filter(|&(_, u)| u >= max - UTILITY_TIE_EPS)
        .min_by_key(|&(i, _)| (lattice.level_sum(i), i))
        .map(|(i, _)| i)
}
