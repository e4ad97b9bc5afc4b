//! The full-domain generalization lattice.
//!
//! Nodes are level vectors, one level per quasi-identifier. A node's
//! successors raise exactly one level by one. Node indices follow the
//! lexicographic order of level vectors, so index 0 is the bottom.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::{Error, Result};

/// Default upper bound on the number of lattice nodes.
pub const DEFAULT_LATTICE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    Unevaluated,
    Evaluated,
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeNode {
    pub id: String,
    pub levels: Vec<usize>,
    pub satisfied: Option<bool>,
    pub utility: Option<f64>,
    pub status: NodeStatus,
    /// Node whose evaluation implied this node's outcome.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pruned_by: Option<String>,
}

impl LatticeNode {
    pub fn new(levels: Vec<usize>) -> Self {
        LatticeNode {
            id: node_id(&levels),
            levels,
            satisfied: None,
            utility: None,
            status: NodeStatus::Unevaluated,
            pruned_by: None,
        }
    }
}

/// Dot-joined level vector, e.g. `0.1.2`.
pub fn node_id(levels: &[usize]) -> String {
    let mut s = String::new();
    for (i, l) in levels.iter().enumerate() {
        if i > 0 {
            s.push('.');
        }
        s.push_str(&format!("{l}"));
    }
    s
}

/// Inverse of [`node_id`].
pub fn parse_node_id(id: &str) -> Option<Vec<usize>> {
    id.split('.').map(|p| p.parse().ok()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    heights: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

/// Lattice over the given hierarchy heights with the default cap.
pub fn build_lattice(heights: &[usize]) -> Result<Lattice> {
    Lattice::new(heights, DEFAULT_LATTICE_CAP)
}

impl Lattice {
    pub fn new(heights: &[usize], cap: u64) -> Result<Lattice> {
        if heights.is_empty() {
            return Err(Error::Invalid("lattice needs at least one quasi-identifier".into()));
        }
        let mut nodes: u128 = 1;
        for &h in heights {
            nodes = nodes.saturating_mul(h as u128 + 1);
        }
        if nodes > cap as u128 {
            return Err(Error::LatticeTooLarge { nodes, cap });
        }
        let mut strides = vec![1usize; heights.len()];
        for i in (0..heights.len() - 1).rev() {
            strides[i] = strides[i + 1] * (heights[i + 1] + 1);
        }
        Ok(Lattice {
            heights: heights.to_vec(),
            strides,
            len: nodes as usize,
        })
    }

    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.len - 1
    }

    pub fn max_level_sum(&self) -> usize {
        self.heights.iter().sum()
    }

    pub fn index_of(&self, levels: &[usize]) -> Option<usize> {
        if levels.len() != self.heights.len() || levels.iter().zip(&self.heights).any(|(l, h)| l > h) {
            return None;
        }
        Some(levels.iter().zip(&self.strides).map(|(l, s)| l * s).sum())
    }

    pub fn levels_of(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        self.strides
            .iter()
            .zip(&self.heights)
            .map(|(&s, _)| {
                let l = rest / s;
                rest %= s;
                l
            })
            .collect()
    }

    pub fn level_sum(&self, index: usize) -> usize {
        self.levels_of(index).iter().sum()
    }

    /// Nodes that raise one level of `index` by one.
    pub fn successors(&self, index: usize) -> Vec<usize> {
        let levels = self.levels_of(index);
        (0..levels.len())
            .filter(|&i| levels[i] < self.heights[i])
            .map(|i| index + self.strides[i])
            .collect()
    }

    /// Nodes that lower one level of `index` by one.
    pub fn predecessors(&self, index: usize) -> Vec<usize> {
        let levels = self.levels_of(index);
        (0..levels.len())
            .filter(|&i| levels[i] > 0)
            .map(|i| index - self.strides[i])
            .collect()
    }

    /// Covers relation as `(lower, upper)` index pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len)
            .flat_map(|i| self.successors(i).into_iter().map(move |s| (i, s)))
            .collect()
    }

    /// Node indices grouped by level sum, each group in index order.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        let mut layers = vec![Vec::new(); self.max_level_sum() + 1];
        for i in 0..self.len {
            layers[self.level_sum(i)].push(i);
        }
        layers
    }

    pub fn nodes(&self) -> Vec<LatticeNode> {
        (0..self.len).map(|i| LatticeNode::new(self.levels_of(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn product_sizes() {
        assert_eq!(build_lattice(&[1, 2, 2]).unwrap().len(), 18);
        let chain = build_lattice(&[3]).unwrap();
        assert_eq!(chain.len(), 4);
        assert_eq!(chain.edges(), vec![(0, 1), (1, 2), (2, 3)]);
        assert!(matches!(
            Lattice::new(&[9, 9, 9, 9, 9, 9, 9], 1_000_000),
            Err(Error::LatticeTooLarge { .. })
        ));
        assert!(build_lattice(&[]).is_err());
    }

    #[test]
    fn ranks_and_ends() {
        let l = build_lattice(&[1, 2, 2]).unwrap();
        assert_eq!(l.layers().len(), 6);
        assert_eq!(node_id(&l.levels_of(l.bottom())), "0.0.0");
        assert_eq!(node_id(&l.levels_of(l.top())), "1.2.2");
        assert_eq!(parse_node_id("1.2.2"), Some(vec![1, 2, 2]));
        assert_eq!(parse_node_id("1.x"), None);
        assert_eq!(l.index_of(&[1, 3, 0]), None);
    }

    #[test]
    fn enumeration_matches_product_for_eight_qids() {
        let heights = [2, 2, 2, 2, 2, 3, 1, 2];
        let l = build_lattice(&heights).unwrap();
        let mut seen = BTreeSet::new();
        for i in 0..l.len() {
            let lv = l.levels_of(i);
            assert_eq!(l.index_of(&lv), Some(i));
            seen.insert(lv);
        }
        let expected: usize = heights.iter().map(|h| h + 1).product();
        assert_eq!(seen.len(), expected);
        assert_eq!(l.len(), expected);
    }

    #[test]
    fn every_node_reachable_from_bottom() {
        let l = build_lattice(&[2, 1, 3]).unwrap();
        let mut seen = vec![false; l.len()];
        let mut stack = vec![l.bottom()];
        while let Some(n) = stack.pop() {
            if seen[n] {
                continue;
            }
            seen[n] = true;
            stack.extend(l.successors(n));
        }
        assert!(seen.iter().all(|&s| s));
        for (a, b) in l.edges() {
            assert_eq!(l.level_sum(b), l.level_sum(a) + 1);
            assert!(l.predecessors(b).contains(&a));
        }
    }
}
