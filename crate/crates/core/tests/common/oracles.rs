//! Independent recomputations used as test oracles.

use std::collections::{BTreeMap, BTreeSet};

use super::{brute_classes, Instance};

pub fn min_class(classes: &[Vec<usize>]) -> usize {
    classes.iter().map(|c| c.len()).min().unwrap_or(0)
}

pub fn min_distinct(classes: &[Vec<usize>], sa: &[usize]) -> usize {
    classes
        .iter()
        .map(|c| c.iter().map(|&r| sa[r]).collect::<BTreeSet<_>>().len())
        .min()
        .unwrap_or(0)
}

/// Minimum-cost transport of `p` onto `q` under `cost`, by successive
/// shortest augmenting paths (Bellman-Ford) on the bipartite flow network.
pub fn transport(p: &[f64], q: &[f64], cost: impl Fn(usize, usize) -> f64) -> f64 {
    #[derive(Clone)]
    struct Edge {
        to: usize,
        cap: f64,
        cost: f64,
        rev: usize,
    }
    let m = p.len();
    let (s, t) = (2 * m, 2 * m + 1);
    let mut g: Vec<Vec<Edge>> = vec![Vec::new(); 2 * m + 2];
    let add = |g: &mut Vec<Vec<Edge>>, a: usize, b: usize, cap: f64, cost: f64| {
        let ra = g[b].len();
        let rb = g[a].len();
        g[a].push(Edge { to: b, cap, cost, rev: ra });
        g[b].push(Edge {
            to: a,
            cap: 0.0,
            cost: -cost,
            rev: rb,
        });
    };
    for i in 0..m {
        add(&mut g, s, i, p[i], 0.0);
        add(&mut g, m + i, t, q[i], 0.0);
        for j in 0..m {
            add(&mut g, i, m + j, f64::INFINITY, cost(i, j));
        }
    }
    const TINY: f64 = 1e-15;
    let mut total = 0.0;
    loop {
        let nodes = g.len();
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
        dist[s] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u].is_infinite() {
                    continue;
                }
                for (ei, e) in g[u].iter().enumerate() {
                    if e.cap > TINY && dist[u] + e.cost < dist[e.to] - 1e-15 {
                        dist[e.to] = dist[u] + e.cost;
                        prev[e.to] = Some((u, ei));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[t].is_infinite() {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while let Some((u, ei)) = prev[v] {
            push = push.min(g[u][ei].cap);
            v = u;
        }
        let mut v = t;
        while let Some((u, ei)) = prev[v] {
            g[u][ei].cap -= push;
            let (to, rev) = (g[u][ei].to, g[u][ei].rev);
            g[to][rev].cap += push;
            v = u;
        }
        total += push * dist[t];
    }
    total
}

pub fn emd_ordered_oracle(p: &[f64], q: &[f64]) -> f64 {
    let m = p.len();
    if m < 2 {
        return 0.0;
    }
    transport(p, q, |i, j| (i as f64 - j as f64).abs() / (m - 1) as f64)
}

pub fn emd_equal_oracle(p: &[f64], q: &[f64]) -> f64 {
    transport(p, q, |i, j| if i == j { 0.0 } else { 1.0 })
}

/// Distribution of `values` over the sorted distinct values of `support`.
pub fn distribution<T: Ord + Copy>(values: impl Iterator<Item = T>, support: &[T]) -> Vec<f64> {
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    let mut n = 0usize;
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
        n += 1;
    }
    support
        .iter()
        .map(|s| counts.get(s).copied().unwrap_or(0) as f64 / n as f64)
        .collect()
}

/// Worst class-to-table EMD over the records in `classes`, with the ordered
/// ground distance on `values`.
pub fn worst_emd<T: Ord + Copy>(classes: &[Vec<usize>], values: &[T], ordered: bool) -> f64 {
    let rows: Vec<usize> = classes.iter().flatten().copied().collect();
    let support: Vec<T> = rows.iter().map(|&r| values[r]).collect::<BTreeSet<_>>().into_iter().collect();
    let q = distribution(rows.iter().map(|&r| values[r]), &support);
    classes
        .iter()
        .map(|c| {
            let p = distribution(c.iter().map(|&r| values[r]), &support);
            if ordered {
                emd_ordered_oracle(&p, &q)
            } else {
                emd_equal_oracle(&p, &q)
            }
        })
        .fold(0.0, f64::max)
}

/// Smallest group in a projection onto any `l` of the QIDs.
pub fn lkc_min_group(inst: &Instance, levels: &[usize], l: usize) -> usize {
    let m = inst.trees.len();
    let l = l.min(m);
    let mut best = usize::MAX;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != l {
            continue;
        }
        let mut groups: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for r in 0..inst.n() {
            let key: Vec<usize> = (0..m)
                .filter(|q| mask & (1 << q) != 0)
                .map(|q| inst.trees[q].group(inst.leaves[q][r], levels[q]))
                .collect();
            *groups.entry(key).or_insert(0) += 1;
        }
        best = best.min(groups.values().copied().min().unwrap_or(0));
    }
    best
}

/// Constraints the lattice oracle knows how to check.
#[derive(Debug, Clone, Copy)]
pub enum Rule {
    K(usize),
    Distinct(usize),
    EmdEqual(f64),
    EmdOrdered(f64),
    Lkc(usize, usize),
}

pub fn rule_holds(inst: &Instance, levels: &[usize], classes: &[Vec<usize>], rule: Rule) -> bool {
    if classes.is_empty() {
        return false;
    }
    match rule {
        Rule::K(k) => min_class(classes) >= k,
        Rule::Distinct(l) => min_distinct(classes, &inst.sa) >= l,
        Rule::EmdEqual(t) => worst_emd(classes, &inst.sa, false) <= t + 1e-12,
        Rule::EmdOrdered(t) => worst_emd(classes, &inst.sn, true) <= t + 1e-12,
        Rule::Lkc(l, k) => {
            // LKC only inspects the kept records; recount over them
            let kept: BTreeSet<usize> = classes.iter().flatten().copied().collect();
            let mut sub = inst.clone();
            let rows: Vec<usize> = kept.into_iter().collect();
            sub.leaves = sub.leaves.iter().map(|col| rows.iter().map(|&r| col[r]).collect()).collect();
            sub.sa = rows.iter().map(|&r| sub.sa[r]).collect();
            lkc_min_group(&sub, levels, l) >= k
        }
    }
}

/// Utility from first principles: one minus the mean over QIDs of the mean
/// cell loss, with removed records costing 1 per cell.
pub fn utility(inst: &Instance, levels: &[usize], removed: &BTreeSet<usize>) -> f64 {
    let n = inst.n() as f64;
    let m = inst.trees.len() as f64;
    let mut loss = 0.0;
    for (q, (t, &l)) in inst.trees.iter().zip(levels).enumerate() {
        let mut a = 0.0;
        for r in 0..inst.n() {
            a += if removed.contains(&r) { 1.0 } else { t.cell_loss(inst.leaves[q][r], l) };
        }
        loss += a / n;
    }
    1.0 - loss / m
}

#[derive(Debug, Clone, PartialEq)]
pub struct Best {
    pub levels: Vec<usize>,
    pub utility: f64,
    pub removed: usize,
}

/// Exhaustive argmax over every node. With a positive `suppression_limit`,
/// records of classes violating a `Rule::K` are removed first; the node is
/// feasible when at most that fraction went, something is left and every
/// rule holds on the rest.
pub fn exhaustive_optimum(inst: &Instance, rules: &[Rule], suppression_limit: f64) -> Option<Best> {
    let n = inst.n();
    let all: Vec<usize> = (0..n).collect();
    let mut best: Option<Best> = None;
    for levels in inst.all_nodes() {
        let classes = brute_classes(inst, &levels, &all);
        let (kept, removed) = if suppression_limit > 0.0 {
            let k = rules
                .iter()
                .filter_map(|r| if let Rule::K(k) = r { Some(*k) } else { None })
                .max()
                .unwrap_or(1);
            let removed: BTreeSet<usize> = classes.iter().filter(|c| c.len() < k).flatten().copied().collect();
            let kept: Vec<Vec<usize>> = classes.into_iter().filter(|c| c.len() >= k).collect();
            (kept, removed)
        } else {
            (classes, BTreeSet::new())
        };
        if removed.len() as f64 > suppression_limit * n as f64 + 1e-9 || removed.len() == n {
            continue;
        }
        if !rules.iter().all(|&r| rule_holds(inst, &levels, &kept, r)) {
            continue;
        }
        let u = utility(inst, &levels, &removed);
        let better = match &best {
            None => true,
            Some(b) => {
                let (s, bs): (usize, usize) = (levels.iter().sum(), b.levels.iter().sum());
                u > b.utility + 1e-12 || ((u - b.utility).abs() <= 1e-12 && (s, &levels) < (bs, &b.levels))
            }
        };
        if better {
            best = Some(Best {
                levels,
                utility: u,
                removed: removed.len(),
            });
        }
    }
    best
}

/// Minimum total raise over every split of the descending sequence into
/// contiguous groups of at least `k`, each raised to its maximum.
pub fn exhaustive_grouping_cost(degrees: &[usize], k: usize) -> usize {
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let n = sorted.len();
    let mut best = usize::MAX;
    // bit i set: a group boundary after position i
    for cuts in 0u32..(1 << (n - 1)) {
        let mut start = 0;
        let mut cost = 0;
        let mut ok = true;
        for i in 0..n {
            if i == n - 1 || cuts & (1 << i) != 0 {
                let len = i + 1 - start;
                if len < k {
                    ok = false;
                    break;
                }
                cost += sorted[start..=i].iter().map(|&d| sorted[start] - d).sum::<usize>();
                start = i + 1;
            }
        }
        if ok {
            best = best.min(cost);
        }
    }
    best
}

/// Fewest edges to add to a graph on `n` nodes so that every degree value
/// is shared by at least `k` nodes, by enumerating every edge subset of the
/// complement.
pub fn min_added_edges(n: usize, edges: &[(usize, usize)], k: usize) -> usize {
    let present: BTreeSet<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let missing: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|e| !present.contains(e))
        .collect();
    let mut base = vec![0usize; n];
    for &(a, b) in &present {
        base[a] += 1;
        base[b] += 1;
    }
    let mut best = usize::MAX;
    for mask in 0u32..(1 << missing.len()) {
        let added = mask.count_ones() as usize;
        if added >= best {
            continue;
        }
        let mut deg = base.clone();
        for (i, &(a, b)) in missing.iter().enumerate() {
            if mask & (1 << i) != 0 {
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for d in deg {
            *counts.entry(d).or_insert(0) += 1;
        }
        if counts.values().all(|&c| c >= k) {
            best = added;
        }
    }
    best
}
