//! Random small instances and brute-force oracles shared by the integration
//! tests and the acceptance runner.
#![allow(dead_code)]

pub mod oracles;

use std::collections::BTreeMap;

use anonybench_core::dataset::{AttributeSchema, Dataset, Kind, Role, Value};
use anonybench_core::hierarchy::{Hierarchy, HierarchySet};
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

/// Categorical tree whose level-`j` groups are runs of `2^j` consecutive
/// leaves, topped by `*` at `height`.
#[derive(Debug, Clone)]
pub struct Tree {
    pub name: String,
    pub leaves: usize,
    pub height: usize,
}

impl Tree {
    pub fn group(&self, leaf: usize, level: usize) -> usize {
        if level >= self.height {
            0
        } else {
            leaf >> level
        }
    }

    pub fn label(&self, leaf: usize, level: usize) -> String {
        if level == 0 {
            format!("{}_{leaf}", self.name)
        } else if level >= self.height {
            "*".into()
        } else {
            format!("{}L{level}_{}", self.name, leaf >> level)
        }
    }

    /// Leaves below the level-`level` ancestor of `leaf`.
    pub fn leafs_below(&self, leaf: usize, level: usize) -> usize {
        if level >= self.height {
            return self.leaves;
        }
        let g = leaf >> level;
        (0..self.leaves).filter(|&i| i >> level == g).count()
    }

    pub fn cell_loss(&self, leaf: usize, level: usize) -> f64 {
        (self.leafs_below(leaf, level) - 1) as f64 / (self.leaves - 1) as f64
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        (0..self.leaves)
            .map(|i| (0..=self.height).map(|l| self.label(i, l)).collect())
            .collect()
    }
}

/// A table of categorical QIDs plus a categorical (`sa`) and a numeric
/// (`sn`) sensitive attribute.
#[derive(Debug, Clone)]
pub struct Instance {
    pub data: Dataset,
    pub hs: HierarchySet,
    pub trees: Vec<Tree>,
    /// Leaf index of every record per QID.
    pub leaves: Vec<Vec<usize>>,
    pub sa: Vec<usize>,
    pub sn: Vec<i64>,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.sa.len()
    }

    pub fn heights(&self) -> Vec<usize> {
        self.trees.iter().map(|t| t.height).collect()
    }

    pub fn lattice_size(&self) -> usize {
        self.trees.iter().map(|t| t.height + 1).product()
    }

    /// Every level vector in lexicographic order.
    pub fn all_nodes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for t in &self.trees {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..=t.height).map(move |l| {
                        let mut v = p.clone();
                        v.push(l);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

pub struct Shape {
    pub rows: (usize, usize),
    pub qids: (usize, usize),
    pub leaves: (usize, usize),
    pub height: (usize, usize),
    pub sa_values: (usize, usize),
}

pub const SMALL: Shape = Shape {
    rows: (4, 30),
    qids: (1, 3),
    leaves: (2, 6),
    height: (1, 3),
    sa_values: (1, 4),
};

/// Lattices of at most `4^4 = 256` nodes.
pub const LATTICE: Shape = Shape {
    rows: (10, 80),
    qids: (3, 4),
    leaves: (3, 8),
    height: (1, 3),
    sa_values: (2, 4),
};

pub fn random_instance(seed: u64, shape: &Shape) -> Instance {
    let mut rng = SmallRng::seed_from_u64(seed);
    let n = rng.random_range(shape.rows.0..=shape.rows.1);
    let m = rng.random_range(shape.qids.0..=shape.qids.1);
    let trees: Vec<Tree> = (0..m)
        .map(|q| {
            let leaves = rng.random_range(shape.leaves.0..=shape.leaves.1);
            // a level above 0 must merge something, so cap by the leaf count
            let max_h = (usize::BITS - (leaves - 1).leading_zeros()) as usize;
            let height = rng.random_range(shape.height.0..=shape.height.1.min(max_h.max(1)));
            Tree {
                name: format!("q{q}"),
                leaves,
                height,
            }
        })
        .collect();
    let sa_values = rng.random_range(shape.sa_values.0..=shape.sa_values.1);
    // skewed leaf choice so that small classes are common
    let leaves: Vec<Vec<usize>> = trees
        .iter()
        .map(|t| {
            (0..n)
                .map(|_| {
                    let a = rng.random_range(0..t.leaves);
                    let b = rng.random_range(0..t.leaves);
                    a.min(b)
                })
                .collect()
        })
        .collect();
    let sa: Vec<usize> = (0..n).map(|_| rng.random_range(0..sa_values)).collect();
    let sn: Vec<i64> = (0..n).map(|_| rng.random_range(1..=6)).collect();

    let mut schema: Vec<AttributeSchema> = trees
        .iter()
        .map(|t| AttributeSchema::new(t.name.clone(), Role::QuasiIdentifier, Kind::Categorical))
        .collect();
    schema.push(AttributeSchema::new("sa", Role::Sensitive, Kind::Categorical));
    schema.push(AttributeSchema::new("sn", Role::Sensitive, Kind::Numeric));
    let records: Vec<Vec<Value>> = (0..n)
        .map(|r| {
            let mut rec: Vec<Value> = trees
                .iter()
                .zip(&leaves)
                .map(|(t, col)| Value::text(t.label(col[r], 0)))
                .collect();
            rec.push(Value::text(format!("s{}", sa[r])));
            rec.push(Value::Number(sn[r] as f64));
            rec
        })
        .collect();
    let data = Dataset::new(schema, records).expect("valid instance");
    let mut hs = HierarchySet::new();
    for t in &trees {
        hs.insert(Hierarchy::from_rows(&t.name, &t.rows(), Some(&data)).expect("valid tree"));
    }
    Instance {
        data,
        hs,
        trees,
        leaves,
        sa,
        sn,
    }
}

/// Records grouped by their generalized key, groups in first-record order.
pub fn brute_classes(inst: &Instance, levels: &[usize], rows: &[usize]) -> Vec<Vec<usize>> {
    let mut by_key: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        let key: Vec<usize> = inst
            .trees
            .iter()
            .zip(levels)
            .enumerate()
            .map(|(q, (t, &l))| t.group(inst.leaves[q][r], l))
            .collect();
        by_key.entry(key).or_default().push(r);
    }
    let mut out: Vec<Vec<usize>> = by_key.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}
