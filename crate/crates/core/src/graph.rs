//! k-degree anonymization of simple undirected graphs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::{Error, Result};

/// Retries of the target escalation when greedy realization stalls.
pub const MAX_ESCALATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from unordered pairs. Reversed and repeated pairs
    /// collapse; self-loops and out-of-range ids are errors.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Invalid(format!("self-loop on node {a}")));
            }
            if a >= node_count || b >= node_count {
                return Err(Error::Invalid(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Graph { node_count, edges: set })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.node_count];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn is_supergraph_of(&self, other: &Graph) -> bool {
        self.node_count == other.node_count && other.edges.is_subset(&self.edges)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KDegreeCheck {
    pub satisfied: bool,
    /// Degree values occurring fewer than `k` times, ascending.
    pub violating_degrees: Vec<usize>,
}

fn multiplicities(degrees: &[usize]) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for &d in degrees {
        *m.entry(d).or_insert(0) += 1;
    }
    m
}

pub fn check_degree_sequence(degrees: &[usize], k: usize) -> KDegreeCheck {
    let violating_degrees: Vec<usize> = multiplicities(degrees)
        .into_iter()
        .filter(|&(_, c)| c < k)
        .map(|(d, _)| d)
        .collect();
    KDegreeCheck {
        satisfied: violating_degrees.is_empty(),
        violating_degrees,
    }
}

pub fn check_k_degree(g: &Graph, k: usize) -> KDegreeCheck {
    check_degree_sequence(&g.degrees(), k)
}

/// Number of nodes an adversary knowing one degree cannot tell apart.
pub fn degree_attack(g: &Graph, known_degree: usize) -> usize {
    g.degrees().iter().filter(|&&d| d == known_degree).count()
}

/// Node order used for grouping: degree descending, then index.
fn descending_order(degrees: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..degrees.len()).collect();
    order.sort_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)));
    order
}

/// Minimum total raise making every degree value shared by at least `k`
/// nodes. Groups are contiguous runs of the descending-sorted sequence with
/// sizes in `k..=2k-1`; each member is raised to its group's maximum.
pub fn anonymize_degree_sequence(degrees: &[usize], k: usize) -> Result<Vec<usize>> {
    let n = degrees.len();
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let order = descending_order(degrees);
    let sorted: Vec<usize> = order.iter().map(|&i| degrees[i]).collect();
    let groups = optimal_groups(&sorted, k);
    let mut out = vec![0; n];
    for (start, end) in groups {
        let top = sorted[start];
        for &node in &order[start..end] {
            out[node] = top;
        }
    }
    Ok(out)
}

/// `[start, end)` runs of an optimal grouping of a descending sequence.
fn optimal_groups(sorted: &[usize], k: usize) -> Vec<(usize, usize)> {
    let n = sorted.len();
    let mut prefix = vec![0u64; n + 1];
    for (i, &d) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + d as u64;
    }
    let cost = |s: usize, e: usize| sorted[s] as u64 * (e - s) as u64 - (prefix[e] - prefix[s]);
    let mut best = vec![u64::MAX; n + 1];
    let mut back = vec![0usize; n + 1];
    best[0] = 0;
    for e in k..=n {
        let lo = e.saturating_sub(2 * k - 1);
        for s in lo..=e - k {
            if best[s] == u64::MAX {
                continue;
            }
            let c = best[s] + cost(s, e);
            if c < best[e] {
                best[e] = c;
                back[e] = s;
            }
        }
    }
    let mut groups = Vec::new();
    let mut e = n;
    while e > 0 {
        groups.push((back[e], e));
        e = back[e];
    }
    groups.reverse();
    groups
}

/// Total raise of an anonymized sequence.
pub fn grouping_cost(original: &[usize], anonymized: &[usize]) -> usize {
    original.iter().zip(anonymized).map(|(a, b)| b - a).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Realization {
    pub graph: Graph,
    /// Degree sequence actually realized.
    pub target: Vec<usize>,
    /// Number of stall escalations applied.
    pub escalations: usize,
    /// Nodes raised by one to repair odd degree sums.
    pub parity_repairs: usize,
}

impl Realization {
    pub fn escalated(&self) -> bool {
        self.escalations > 0 || self.parity_repairs > 0
    }
}

/// Greedily adds edges until the degrees equal `target`. Connects the node
/// with the largest residual deficit to the largest-deficit node it is not
/// yet adjacent to; returns the residual deficits on a stall.
pub fn add_edges_to_target(g: &Graph, target: &[usize]) -> core::result::Result<Graph, Vec<usize>> {
    let n = g.node_count;
    let current = g.degrees();
    let mut deficit: Vec<usize> = target.iter().zip(&current).map(|(t, c)| t - c).collect();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (a, b) in g.edges() {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut out = g.clone();
    loop {
        let Some(u) = (0..n).filter(|&i| deficit[i] > 0).max_by(|&a, &b| deficit[a].cmp(&deficit[b]).then(b.cmp(&a)))
        else {
            return Ok(out);
        };
        let v = (0..n)
            .filter(|&j| j != u && deficit[j] > 0 && !adj[u].contains(&j))
            .max_by(|&a, &b| deficit[a].cmp(&deficit[b]).then(b.cmp(&a)));
        let Some(v) = v else {
            return Err(deficit);
        };
        adj[u].insert(v);
        adj[v].insert(u);
        out.edges.insert((u.min(v), u.max(v)));
        deficit[u] -= 1;
        deficit[v] -= 1;
    }
}

/// Makes the target sum even. Every node below `n - 1` is tried raised by
/// one and re-grouped; the even-sum result of smallest total wins (lowest
/// target, then lowest index, on ties). Without an even candidate the
/// smallest odd one is taken and the search repeats.
fn repair_parity(current: &[usize], target: Vec<usize>, k: usize) -> Result<(Vec<usize>, usize)> {
    let n = target.len();
    let mut target = target;
    let mut repairs = 0;
    while target.iter().sum::<usize>() % 2 == 1 {
        if repairs > n {
            return Err(Error::Unrealizable {
                residual: target.iter().zip(current).map(|(t, c)| t - c).collect(),
            });
        }
        let mut order: Vec<usize> = (0..n).filter(|&i| target[i] + 1 < n).collect();
        order.sort_by_key(|&i| (target[i], i));
        let mut even: Option<(usize, Vec<usize>)> = None;
        let mut odd: Option<(usize, Vec<usize>)> = None;
        for i in order {
            let mut raised = target.clone();
            raised[i] += 1;
            let regrouped = anonymize_degree_sequence(&raised, k)?;
            if regrouped.iter().any(|&d| d >= n) {
                continue;
            }
            let sum: usize = regrouped.iter().sum();
            let slot = if sum % 2 == 0 { &mut even } else { &mut odd };
            if slot.as_ref().map_or(true, |(best, _)| sum < *best) {
                *slot = Some((sum, regrouped));
            }
        }
        target = match (even, odd) {
            (Some((_, t)), _) | (None, Some((_, t))) => t,
            (None, None) => {
                return Err(Error::Unrealizable {
                    residual: target.iter().zip(current).map(|(t, c)| t - c).collect(),
                })
            }
        };
        repairs += 1;
    }
    Ok((target, repairs))
}

/// Raises by one every node of the lowest-degree group.
fn escalate(target: &[usize]) -> Vec<usize> {
    let degree = *target.iter().min().expect("non-empty target");
    target.iter().map(|&d| if d == degree { d + 1 } else { d }).collect()
}

/// Realizes `target` as a supergraph of `g`, repairing parity and
/// escalating stalled targets at most [`MAX_ESCALATIONS`] times.
pub fn realize_graph(g: &Graph, target: &[usize], k: usize) -> Result<Realization> {
    let current = g.degrees();
    if target.len() != g.node_count {
        return Err(Error::Invalid(format!(
            "target has {} entries for {} nodes",
            target.len(),
            g.node_count
        )));
    }
    if let Some(i) = (0..target.len()).find(|&i| target[i] < current[i]) {
        return Err(Error::Invalid(format!(
            "target {} below current degree {} at node {i}",
            target[i], current[i]
        )));
    }
    let (mut target, mut parity_repairs) = repair_parity(&current, target.to_vec(), k)?;
    let mut escalations = 0;
    loop {
        match add_edges_to_target(g, &target) {
            Ok(graph) => {
                return Ok(Realization {
                    graph,
                    target,
                    escalations,
                    parity_repairs,
                })
            }
            Err(residual) => {
                let raised = escalate(&target);
                if escalations == MAX_ESCALATIONS || raised.iter().any(|&d| d >= g.node_count) {
                    return Err(Error::Unrealizable { residual });
                }
                escalations += 1;
                let (t, r) = repair_parity(&current, raised, k)?;
                target = t;
                parity_repairs += r;
            }
        }
    }
}

/// Degree-sequence anonymization followed by realization.
pub fn anonymize_graph(g: &Graph, k: usize) -> Result<Realization> {
    let target = anonymize_degree_sequence(&g.degrees(), k)?;
    realize_graph(g, &target, k)
}
