//! Generalization hierarchies.
//!
//! A hierarchy of height `h` maps every leaf (a raw value) to one ancestor
//! label per level `1..=h`; level `h` is the single root `*`. Numeric
//! attributes use interval hierarchies whose inner labels are `[lo,hi)` or
//! `[lo,hi]`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;

use crate::dataset::{format_number, Dataset, Value};
use crate::{Error, Result, MISSING, SUPPRESSED};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Interval {
    pub fn half_open(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            lower_closed: true,
            upper_closed: false,
        }
    }

    pub fn closed(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            lower_closed: true,
            upper_closed: true,
        }
    }

    pub fn width(&self) -> f64 {
        (self.upper - self.lower).abs()
    }

    pub fn contains(&self, x: f64) -> bool {
        let lo = if self.lower_closed { x >= self.lower } else { x > self.lower };
        let hi = if self.upper_closed { x <= self.upper } else { x < self.upper };
        lo && hi
    }

    pub fn midpoint(&self) -> f64 {
        (self.lower + self.upper) / 2.0
    }

    /// Parses `[a,b)`, `[a,b]`, `(a,b]` or `(a,b)`.
    pub fn parse(s: &str) -> Option<Interval> {
        let s = s.trim();
        let lower_closed = match s.as_bytes().first()? {
            b'[' => true,
            b'(' => false,
            _ => return None,
        };
        let upper_closed = match s.as_bytes().last()? {
            b']' => true,
            b')' => false,
            _ => return None,
        };
        let inner = &s[1..s.len() - 1];
        let (a, b) = inner.split_once(',')?;
        let lower: f64 = a.trim().parse().ok()?;
        let upper: f64 = b.trim().parse().ok()?;
        if !lower.is_finite() || !upper.is_finite() {
            return None;
        }
        Some(Interval {
            lower,
            upper,
            lower_closed,
            upper_closed,
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lower_closed { '[' } else { '(' },
            format_number(self.lower),
            format_number(self.upper),
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyNode {
    pub label: String,
    pub level: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub leaf_count: usize,
    pub interval: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    attribute: String,
    height: usize,
    nodes: Vec<HierarchyNode>,
    leaf_index: BTreeMap<String, usize>,
    by_level: Vec<Vec<usize>>,
    label_index: BTreeMap<(usize, String), usize>,
    numeric: bool,
    domain: Option<(f64, f64)>,
}

impl Hierarchy {
    /// Builds and validates a hierarchy from `leaf, level1, ..., levelH` rows.
    ///
    /// When `dataset` is given, every observed value of `attribute` must be a
    /// leaf (extra leaves are fine) and numeric attributes take their loss
    /// denominator from the dataset's bounds.
    pub fn from_rows(attribute: &str, rows: &[Vec<String>], dataset: Option<&Dataset>) -> Result<Hierarchy> {
        let err = |reason: String| Error::Hierarchy {
            attribute: attribute.to_string(),
            reason,
        };
        let schema = match dataset {
            Some(d) => Some(d.attribute(attribute)?),
            None => None,
        };
        let numeric = schema.map(|s| s.is_numeric()).unwrap_or(false);
        if rows.is_empty() {
            return Err(err("no rows".into()));
        }
        let width = rows[0].len();
        if width < 2 {
            return Err(err("rows need a leaf and at least one level".into()));
        }
        let height = width - 1;
        let mut b = Builder::new(attribute, height, numeric);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(err(format!(
                    "ragged row {}: {} columns, expected {width}",
                    i + 1,
                    row.len()
                )));
            }
            let cells: Vec<&str> = row.iter().map(|c| c.trim()).collect();
            if cells[height] != SUPPRESSED {
                return Err(err(format!("row {}: top level must be `*`", i + 1)));
            }
            let leaf = if numeric && cells[0] != MISSING {
                let x: f64 = cells[0]
                    .parse()
                    .map_err(|_| err(format!("row {}: leaf `{}` is not a number", i + 1, cells[0])))?;
                format_number(x)
            } else {
                cells[0].to_string()
            };
            if leaf == SUPPRESSED {
                return Err(err("`*` cannot be a leaf".into()));
            }
            let mut chain: Vec<String> = Vec::with_capacity(width);
            chain.push(leaf);
            chain.extend(cells[1..].iter().map(|c| c.to_string()));
            b.add_chain(&chain).map_err(err)?;
        }
        let domain = match schema {
            Some(s) if numeric => s.bounds(),
            _ => None,
        };
        let h = b.finish(domain).map_err(err)?;

        if let Some(d) = dataset {
            let idx = d.attribute_index(attribute)?;
            for v in d.column(idx) {
                if h.leaf_index.get(v.label().as_ref()).is_none() {
                    return Err(Error::UnknownLeaf {
                        attribute: attribute.to_string(),
                        value: v.label().into_owned(),
                    });
                }
            }
        }
        Ok(h)
    }

    /// Two-level hierarchy: leaves -> `*`.
    pub fn flat(attribute: &str, leaves: &[String]) -> Result<Hierarchy> {
        let rows: Vec<Vec<String>> = leaves
            .iter()
            .map(|l| vec![l.clone(), SUPPRESSED.to_string()])
            .collect();
        Hierarchy::from_rows(attribute, &rows, None)
    }

    /// Equal-width binning over `[min, max]` of `values`: leaves are the
    /// distinct values, level 1 holds `bins` intervals (the last one closed)
    /// and level 2 is `*`.
    pub fn bin_numeric(attribute: &str, values: &[f64], bins: usize) -> Result<Hierarchy> {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if values.is_empty() {
            return Err(Error::Invalid(format!("no values to bin for `{attribute}`")));
        }
        Hierarchy::bin_numeric_over(attribute, values, bins, lo, hi)
    }

    /// [`Hierarchy::bin_numeric`] over an explicit domain.
    pub fn bin_numeric_over(attribute: &str, values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Hierarchy> {
        if bins < 2 {
            return Err(Error::Invalid(format!("bins must be >= 2, got {bins}")));
        }
        if values.is_empty() {
            return Err(Error::Invalid(format!("no values to bin for `{attribute}`")));
        }
        if !(lo < hi) {
            return Err(Error::ZeroWidthDomain(attribute.to_string()));
        }
        let edges = bin_edges(lo, hi, bins);
        let intervals: Vec<Interval> = (0..bins)
            .map(|i| {
                if i + 1 == bins {
                    Interval::closed(edges[i], edges[i + 1])
                } else {
                    Interval::half_open(edges[i], edges[i + 1])
                }
            })
            .collect();
        let mut distinct: Vec<f64> = values.to_vec();
        distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        distinct.dedup();

        let mut b = Builder::new(attribute, 2, true);
        // every bin exists even when empty, so loss widths stay comparable
        let root = b.ensure_node(2, SUPPRESSED);
        for iv in &intervals {
            let bin = b.ensure_node(1, &iv.to_string());
            b.nodes[bin].parent = Some(root);
            b.nodes[root].children.push(bin);
        }
        for &x in &distinct {
            if x < lo || x > hi {
                return Err(Error::Invalid(format!("{x} outside binning domain [{lo}, {hi}]")));
            }
            let bin = locate_bin(&edges, x);
            let chain = [format_number(x), intervals[bin].to_string(), SUPPRESSED.to_string()];
            b.add_chain(&chain).map_err(|reason| Error::Hierarchy {
                attribute: attribute.to_string(),
                reason,
            })?;
        }
        b.finish(Some((lo, hi))).map_err(|reason| Error::Hierarchy {
            attribute: attribute.to_string(),
            reason,
        })
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_numeric(&self) -> bool {
        self.numeric
    }

    pub fn domain(&self) -> Option<(f64, f64)> {
        self.domain
    }

    pub fn nodes(&self) -> &[HierarchyNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &HierarchyNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> usize {
        self.by_level[self.height][0]
    }

    /// Node ids at one level, in insertion order.
    pub fn level_nodes(&self, level: usize) -> &[usize] {
        &self.by_level[level]
    }

    pub fn leaf_count(&self) -> usize {
        self.by_level[0].len()
    }

    /// Leaves below a node.
    pub fn leafs(&self, node: usize) -> usize {
        self.nodes[node].leaf_count
    }

    /// Leaf node of a raw value. Numeric values that are not leaves fall back
    /// to `None`; use [`Hierarchy::ancestor_of_value`] for interval lookup.
    pub fn leaf(&self, value: &Value) -> Option<usize> {
        self.leaf_index.get(value.label().as_ref()).copied()
    }

    pub fn ancestor(&self, node: usize, level: usize) -> usize {
        let mut n = node;
        while self.nodes[n].level < level {
            n = self.nodes[n].parent.expect("non-root node has a parent");
        }
        n
    }

    /// Node representing `value` at `level`.
    pub fn ancestor_of_value(&self, value: &Value, level: usize) -> Result<usize> {
        if level > self.height {
            return Err(Error::LevelOutOfRange {
                attribute: self.attribute.clone(),
                level,
                height: self.height,
            });
        }
        if let Some(leaf) = self.leaf(value) {
            return Ok(self.ancestor(leaf, level));
        }
        if let (Value::Number(x), true) = (value, level >= 1) {
            if let Some(&n) = self.by_level[1]
                .iter()
                .find(|&&n| self.nodes[n].interval.map(|iv| iv.contains(*x)).unwrap_or(false))
            {
                return Ok(self.ancestor(n, level));
            }
        }
        Err(Error::UnknownLeaf {
            attribute: self.attribute.clone(),
            value: value.label().into_owned(),
        })
    }

    /// The value's ancestor label at `level`: the value itself at 0 and
    /// [`Value::Suppressed`] at the root.
    pub fn generalize_value(&self, value: &Value, level: usize) -> Result<Value> {
        let n = self.ancestor_of_value(value, level)?;
        Ok(match level {
            0 => value.clone(),
            l if l == self.height => Value::Suppressed,
            _ => Value::Text(self.nodes[n].label.clone()),
        })
    }

    /// Looks up a released cell label, preferring the lowest level.
    pub fn node_for_label(&self, label: &str) -> Option<usize> {
        if let Some(&n) = self.leaf_index.get(label) {
            return Some(n);
        }
        (1..=self.height).find_map(|l| self.label_index.get(&(l, label.to_string())).copied())
    }

    /// Information loss of a node: interval width over domain width for
    /// interval nodes, `(leafs - 1) / (leafs(root) - 1)` otherwise; the
    /// root always costs 1 and leaves 0.
    pub fn node_loss(&self, node: usize) -> f64 {
        let n = &self.nodes[node];
        if n.level == self.height {
            return 1.0;
        }
        if n.level == 0 {
            return 0.0;
        }
        if let (Some(iv), Some((lo, hi))) = (n.interval, self.domain) {
            return (iv.width() / (hi - lo).abs()).min(1.0);
        }
        let total = self.leaf_count();
        if total <= 1 {
            return 0.0;
        }
        (n.leaf_count as f64 - 1.0) / (total as f64 - 1.0)
    }

    /// `leaf, level1, ..., levelH` rows, one per leaf.
    pub fn to_rows(&self) -> Vec<Vec<String>> {
        self.by_level[0]
            .iter()
            .map(|&leaf| {
                (0..=self.height)
                    .map(|l| self.nodes[self.ancestor(leaf, l)].label.clone())
                    .collect()
            })
            .collect()
    }
}

fn bin_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    edges[bins] = hi;
    edges
}

fn locate_bin(edges: &[f64], x: f64) -> usize {
    let bins = edges.len() - 1;
    let width = edges[1] - edges[0];
    let mut i = (((x - edges[0]) / width) as usize).min(bins - 1);
    while i > 0 && x < edges[i] {
        i -= 1;
    }
    while i + 1 < bins && x >= edges[i + 1] {
        i += 1;
    }
    i
}

struct Builder {
    attribute: String,
    height: usize,
    numeric: bool,
    nodes: Vec<HierarchyNode>,
    label_index: BTreeMap<(usize, String), usize>,
}

impl Builder {
    fn new(attribute: &str, height: usize, numeric: bool) -> Self {
        Builder {
            attribute: attribute.to_string(),
            height,
            numeric,
            nodes: Vec::new(),
            label_index: BTreeMap::new(),
        }
    }

    fn ensure_node(&mut self, level: usize, label: &str) -> usize {
        if let Some(&id) = self.label_index.get(&(level, label.to_string())) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(HierarchyNode {
            label: label.to_string(),
            level,
            parent: None,
            children: Vec::new(),
            leaf_count: 0,
            interval: None,
        });
        self.label_index.insert((level, label.to_string()), id);
        id
    }

    fn add_chain(&mut self, chain: &[String]) -> core::result::Result<(), String> {
        debug_assert_eq!(chain.len(), self.height + 1);
        if self.label_index.contains_key(&(0, chain[0].clone())) {
            let leaf = self.label_index[&(0, chain[0].clone())];
            // identical duplicate rows are tolerated, conflicting ones are not
            let mut n = leaf;
            for (l, label) in chain.iter().enumerate().skip(1) {
                let p = self.nodes[n].parent.expect("stored chains are complete");
                if self.nodes[p].label != *label {
                    return Err(format!(
                        "leaf `{}` has conflicting ancestors at level {l}: `{}` vs `{label}`",
                        chain[0], self.nodes[p].label
                    ));
                }
                n = p;
            }
            return Ok(());
        }
        let mut ids = Vec::with_capacity(chain.len());
        for (l, label) in chain.iter().enumerate() {
            ids.push(self.ensure_node(l, label));
        }
        for l in 0..self.height {
            let (child, parent) = (ids[l], ids[l + 1]);
            match self.nodes[child].parent {
                None => {
                    self.nodes[child].parent = Some(parent);
                    self.nodes[parent].children.push(child);
                }
                Some(p) if p == parent => {}
                Some(p) => {
                    return Err(format!(
                        "node `{}` at level {l} has two parents: `{}` and `{}`",
                        chain[l], self.nodes[p].label, chain[l + 1]
                    ))
                }
            }
        }
        Ok(())
    }

    fn finish(mut self, domain: Option<(f64, f64)>) -> core::result::Result<Hierarchy, String> {
        let mut by_level = vec![Vec::new(); self.height + 1];
        for (id, n) in self.nodes.iter().enumerate() {
            by_level[n.level].push(id);
        }
        if by_level[self.height].len() != 1 {
            return Err("top level must be the single root `*`".into());
        }
        if by_level[0].is_empty() {
            return Err("no leaves".into());
        }
        for l in 1..self.height {
            if let Some(&orphan) = by_level[l].iter().find(|&&n| self.nodes[n].parent.is_none()) {
                return Err(format!("node `{}` at level {l} is never used", self.nodes[orphan].label));
            }
        }
        for &leaf in &by_level[0] {
            let mut n = leaf;
            loop {
                self.nodes[n].leaf_count += 1;
                match self.nodes[n].parent {
                    Some(p) => n = p,
                    None => break,
                }
            }
        }
        let mut domain = domain;
        if self.numeric {
            for l in 1..self.height {
                for &n in &by_level[l] {
                    let label = &self.nodes[n].label;
                    if label == MISSING {
                        continue;
                    }
                    let iv = Interval::parse(label)
                        .ok_or_else(|| format!("numeric hierarchy label `{label}` is not an interval"))?;
                    if !(iv.lower < iv.upper) {
                        return Err(format!("interval `{label}` needs lower < upper"));
                    }
                    self.nodes[n].interval = Some(iv);
                }
            }
            self.check_intervals(&by_level)?;
            if domain.is_none() {
                domain = self.observed_extent(&by_level);
            }
            if let Some((lo, hi)) = domain {
                if !(lo < hi) {
                    return Err("zero-width numeric domain".into());
                }
            }
        }
        let leaf_index = by_level[0]
            .iter()
            .map(|&id| (self.nodes[id].label.clone(), id))
            .collect();
        Ok(Hierarchy {
            attribute: self.attribute,
            height: self.height,
            nodes: self.nodes,
            leaf_index,
            by_level,
            label_index: self.label_index,
            numeric: self.numeric,
            domain,
        })
    }

    fn check_intervals(&self, by_level: &[Vec<usize>]) -> core::result::Result<(), String> {
        for l in 1..=self.height {
            for &p in &by_level[l] {
                let parent = &self.nodes[p];
                let mut kids: Vec<&HierarchyNode> = parent.children.iter().map(|&c| &self.nodes[c]).collect();
                if l == 1 {
                    if let Some(iv) = parent.interval {
                        for k in kids {
                            if let Ok(x) = k.label.parse::<f64>() {
                                if !iv.contains(x) {
                                    return Err(format!("leaf `{}` lies outside `{}`", k.label, parent.label));
                                }
                            }
                        }
                    }
                    continue;
                }
                kids.retain(|k| k.interval.is_some());
                kids.sort_by(|a, b| {
                    let (a, b) = (a.interval.unwrap(), b.interval.unwrap());
                    a.lower.partial_cmp(&b.lower).expect("finite bounds")
                });
                for w in kids.windows(2) {
                    let (a, b) = (w[0].interval.unwrap(), w[1].interval.unwrap());
                    if a.upper > b.lower {
                        return Err(format!(
                            "children `{}` and `{}` of `{}` overlap",
                            w[0].label, w[1].label, parent.label
                        ));
                    }
                }
                if let (Some(iv), Some(first), Some(last)) = (parent.interval, kids.first(), kids.last()) {
                    let (f, z) = (first.interval.unwrap(), last.interval.unwrap());
                    if f.lower < iv.lower || z.upper > iv.upper {
                        return Err(format!("children of `{}` extend beyond it", parent.label));
                    }
                }
            }
        }
        Ok(())
    }

    fn observed_extent(&self, by_level: &[Vec<usize>]) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for l in 0..self.height {
            for &n in &by_level[l] {
                let node = &self.nodes[n];
                if let Some(iv) = node.interval {
                    lo = lo.min(iv.lower);
                    hi = hi.max(iv.upper);
                } else if let Ok(x) = node.label.parse::<f64>() {
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
            }
        }
        lo.is_finite().then_some((lo, hi))
    }
}

/// Hierarchies keyed by attribute name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HierarchySet {
    map: BTreeMap<String, Hierarchy>,
}

impl HierarchySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, h: Hierarchy) {
        self.map.insert(h.attribute.clone(), h);
    }

    pub fn get(&self, attribute: &str) -> Option<&Hierarchy> {
        self.map.get(attribute)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Hierarchy> {
        self.map.values()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Hierarchies of the dataset's QIDs, in schema order.
    pub fn for_qids(&self, dataset: &Dataset) -> Result<Vec<&Hierarchy>> {
        dataset
            .qid_indices()
            .into_iter()
            .map(|i| {
                let name = &dataset.schema()[i].name;
                self.get(name).ok_or_else(|| Error::Hierarchy {
                    attribute: name.clone(),
                    reason: "quasi-identifier has no hierarchy".into(),
                })
            })
            .collect()
    }
}

impl FromIterator<Hierarchy> for HierarchySet {
    fn from_iter<I: IntoIterator<Item = Hierarchy>>(iter: I) -> Self {
        let mut s = HierarchySet::new();
        for h in iter {
            s.insert(h);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeSchema, Kind, Role};

    fn rows(spec: &[&[&str]]) -> Vec<Vec<String>> {
        spec.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect()
    }

    pub(crate) fn religion() -> Hierarchy {
        Hierarchy::from_rows(
            "religion",
            &rows(&[
                &["Greek orthodox", "orthodox", "christian", "*"],
                &["protestant", "protestant-family", "christian", "*"],
                &["Methodist", "protestant-family", "christian", "*"],
                &["christian scientist", "protestant-family", "christian", "*"],
                &["catholic", "catholic", "christian", "*"],
                &["Jewish", "jewish", "non-christian", "*"],
                &["others", "other", "non-christian", "*"],
            ]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn gender_flat() {
        let h = Hierarchy::from_rows("gender", &rows(&[&["Male", "*"], &["Female", "*"]]), None).unwrap();
        assert_eq!(h.height(), 1);
        assert_eq!(h.leaf_count(), 2);
        assert_eq!(h.generalize_value(&Value::text("Male"), 0).unwrap(), Value::text("Male"));
        assert_eq!(h.generalize_value(&Value::text("Male"), 1).unwrap().label(), "*");
        assert!(matches!(
            h.generalize_value(&Value::text("Other"), 1),
            Err(Error::UnknownLeaf { .. })
        ));
        assert!(matches!(
            h.generalize_value(&Value::text("Male"), 2),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn religion_tree_shape() {
        let h = religion();
        assert_eq!(h.height(), 3);
        assert_eq!(h.leafs(h.root()), 7);
        let protestant = h.node_for_label("protestant-family").unwrap();
        assert_eq!(h.leafs(protestant), 3);
        assert!((h.node_loss(protestant) - 1.0 / 3.0).abs() < 1e-12);
        for l in 0..=h.height() {
            let total: usize = h.level_nodes(l).iter().map(|&n| h.leafs(n)).sum();
            assert_eq!(total, 7);
            for &n in h.level_nodes(l) {
                if l > 0 {
                    let kids: usize = h.node(n).children.iter().map(|&c| h.leafs(c)).sum();
                    assert_eq!(kids, h.leafs(n));
                }
            }
        }
    }

    #[test]
    fn superset_leaves_accepted_missing_rejected() {
        let cfg = vec![AttributeSchema::new("g", Role::QuasiIdentifier, Kind::Categorical)];
        let d = Dataset::new(cfg, vec![vec![Value::text("a")], vec![Value::text("b")]]).unwrap();
        assert!(Hierarchy::from_rows("g", &rows(&[&["a", "*"], &["b", "*"], &["c", "*"]]), Some(&d)).is_ok());
        assert!(matches!(
            Hierarchy::from_rows("g", &rows(&[&["a", "*"]]), Some(&d)),
            Err(Error::UnknownLeaf { .. })
        ));
    }

    #[test]
    fn ragged_and_conflicting_rows() {
        assert!(matches!(
            Hierarchy::from_rows("g", &rows(&[&["a", "x", "*"], &["b", "*"]]), None),
            Err(Error::Hierarchy { .. })
        ));
        assert!(matches!(
            Hierarchy::from_rows("g", &rows(&[&["a", "x", "*"], &["a", "y", "*"]]), None),
            Err(Error::Hierarchy { .. })
        ));
        // an inner node cannot hang under two parents
        assert!(matches!(
            Hierarchy::from_rows("g", &rows(&[&["a", "x", "p", "*"], &["b", "x", "q", "*"]]), None),
            Err(Error::Hierarchy { .. })
        ));
        assert!(Hierarchy::from_rows("g", &rows(&[&["a", "x", "*"], &["a", "x", "*"]]), None).is_ok());
    }

    #[test]
    fn binning_width_twenty() {
        let vals: Vec<f64> = (0..=100).map(|x| x as f64).collect();
        let h = Hierarchy::bin_numeric("age", &vals, 5).unwrap();
        assert_eq!(h.height(), 2);
        assert_eq!(h.level_nodes(1).len(), 5);
        for &n in h.level_nodes(1) {
            assert!((h.node(n).interval.unwrap().width() - 20.0).abs() < 1e-12);
        }
        let g = h.generalize_value(&Value::Number(37.0), 1).unwrap();
        assert_eq!(g.label(), "[20,40)");
        assert_eq!(h.generalize_value(&Value::Number(100.0), 1).unwrap().label(), "[80,100]");
        assert!((h.node_loss(h.node_for_label("[20,40)").unwrap()) - 0.2).abs() == 0.0);
    }

    #[test]
    fn binning_two_bins_and_degenerate() {
        let h = Hierarchy::bin_numeric("x", &[0.0, 10.0], 2).unwrap();
        let labels: Vec<&str> = h.level_nodes(1).iter().map(|&n| h.node(n).label.as_str()).collect();
        assert_eq!(labels, ["[0,5)", "[5,10]"]);
        assert_eq!(
            Hierarchy::bin_numeric("x", &[1.0, 1.0, 1.0], 2),
            Err(Error::ZeroWidthDomain("x".into()))
        );
        assert!(Hierarchy::bin_numeric("x", &[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn numeric_hierarchy_from_rows() {
        let cfg = vec![AttributeSchema::new("age", Role::QuasiIdentifier, Kind::Numeric).with_bounds(0.0, 100.0)];
        let d = Dataset::new(cfg, vec![vec![Value::Number(37.0)], vec![Value::Number(85.0)]]).unwrap();
        let h = Hierarchy::from_rows(
            "age",
            &rows(&[
                &["37", "[20,40)", "[0,50)", "*"],
                &["85.0", "[80,100]", "[50,100]", "*"],
            ]),
            Some(&d),
        )
        .unwrap();
        assert_eq!(h.domain(), Some((0.0, 100.0)));
        assert_eq!(h.generalize_value(&Value::Number(85.0), 2).unwrap().label(), "[50,100]");
        let n = h.node_for_label("[0,50)").unwrap();
        assert!((h.node_loss(n) - 0.5).abs() < 1e-15);
        let bad = Hierarchy::from_rows("age", &rows(&[&["37", "young", "*"], &["85", "old", "*"]]), Some(&d));
        assert!(matches!(bad, Err(Error::Hierarchy { .. })));
    }

    #[test]
    fn round_trip_rows() {
        let h = religion();
        let h2 = Hierarchy::from_rows("religion", &h.to_rows(), None).unwrap();
        assert_eq!(h.to_rows(), h2.to_rows());
    }

    #[test]
    fn interval_parse_display() {
        let iv = Interval::parse("[20,40)").unwrap();
        assert_eq!(iv, Interval::half_open(20.0, 40.0));
        assert_eq!(iv.to_string(), "[20,40)");
        assert!(Interval::parse("20-40").is_none());
        assert!(iv.contains(20.0) && !iv.contains(40.0));
    }
}
