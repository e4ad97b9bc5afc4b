//! MDAV (maximum distance to average vector) microaggregation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, Value};
use crate::math::sqrt;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Microaggregation {
    pub output: Dataset,
    /// Record indices per cluster, in formation order.
    pub clusters: Vec<Vec<usize>>,
}

/// Replaces the selected numeric attributes by MDAV cluster centroids.
pub fn mdav_microaggregate(dataset: &Dataset, attributes: &[&str], k: usize) -> Result<Microaggregation> {
    let n = dataset.len();
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if attributes.is_empty() {
        return Err(Error::Invalid("no attribute to microaggregate".into()));
    }
    let mut columns = Vec::with_capacity(attributes.len());
    for &name in attributes {
        let idx = dataset.attribute_index(name)?;
        if !dataset.schema()[idx].is_numeric() {
            return Err(Error::Invalid(format!("attribute {name} is not numeric")));
        }
        let mut col = Vec::with_capacity(n);
        for (r, v) in dataset.column(idx).enumerate() {
            col.push(v.as_number().ok_or_else(|| {
                Error::Invalid(format!("attribute {name} has a non-numeric cell in record {r}"))
            })?);
        }
        columns.push((idx, col));
    }
    let raw: Vec<&[f64]> = columns.iter().map(|(_, c)| c.as_slice()).collect();
    let clusters = mdav_clusters(&raw, k);

    let mut replaced: Vec<Vec<f64>> = columns.iter().map(|(_, c)| c.clone()).collect();
    for cluster in &clusters {
        for (a, col) in raw.iter().enumerate() {
            let mean = cluster.iter().map(|&r| col[r]).sum::<f64>() / cluster.len() as f64;
            for &r in cluster {
                replaced[a][r] = mean;
            }
        }
    }
    let mut output = dataset.clone();
    for ((idx, _), values) in columns.iter().zip(replaced) {
        output = output.with_column(*idx, values.into_iter().map(Value::Number).collect());
    }
    Ok(Microaggregation { output, clusters })
}

/// MDAV partition of the rows of `columns` (one slice per attribute) into
/// clusters of size `k..=2k-1`. Requires `1 <= k <= n`.
pub fn mdav_clusters(columns: &[&[f64]], k: usize) -> Vec<Vec<usize>> {
    let n = columns.first().map(|c| c.len()).unwrap_or(0);
    let points = standardize(columns, n);
    let dim = columns.len();
    let point = |r: usize| &points[r * dim..(r + 1) * dim];

    let mut remaining: Vec<usize> = (0..n).collect();
    let mut clusters = Vec::new();
    while remaining.len() >= 3 * k {
        let c = centroid(&points, dim, &remaining);
        let r = farthest(&points, dim, &remaining, &c);
        let cluster_r = nearest(&points, dim, &remaining, point(r), k);
        remaining.retain(|i| !cluster_r.contains(i));
        let s = farthest(&points, dim, &remaining, point(r));
        let cluster_s = nearest(&points, dim, &remaining, point(s), k);
        remaining.retain(|i| !cluster_s.contains(i));
        clusters.push(cluster_r);
        clusters.push(cluster_s);
    }
    if remaining.len() >= 2 * k {
        let c = centroid(&points, dim, &remaining);
        let r = farthest(&points, dim, &remaining, &c);
        let cluster_r = nearest(&points, dim, &remaining, point(r), k);
        remaining.retain(|i| !cluster_r.contains(i));
        clusters.push(cluster_r);
    }
    if !remaining.is_empty() {
        clusters.push(remaining);
    }
    clusters
}

/// Row-major z-scores; constant attributes become 0.
fn standardize(columns: &[&[f64]], n: usize) -> Vec<f64> {
    let dim = columns.len();
    let mut out = vec![0.0; n * dim];
    for (a, col) in columns.iter().enumerate() {
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let sd = sqrt(var);
        for r in 0..n {
            out[r * dim + a] = if sd > 0.0 { (col[r] - mean) / sd } else { 0.0 };
        }
    }
    out
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn centroid(points: &[f64], dim: usize, rows: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    for &r in rows {
        for (a, x) in c.iter_mut().enumerate() {
            *x += points[r * dim + a];
        }
    }
    for x in &mut c {
        *x /= rows.len() as f64;
    }
    c
}

/// Farthest row from `from`; ties go to the lowest index.
fn farthest(points: &[f64], dim: usize, rows: &[usize], from: &[f64]) -> usize {
    let mut best = rows[0];
    let mut best_d = f64::NEG_INFINITY;
    for &r in rows {
        let d = dist2(&points[r * dim..(r + 1) * dim], from);
        if d > best_d || (d == best_d && r < best) {
            best = r;
            best_d = d;
        }
    }
    best
}

/// The `k` rows closest to `to` (including the row itself at distance 0),
/// ties by index, returned in index order.
fn nearest(points: &[f64], dim: usize, rows: &[usize], to: &[f64], k: usize) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = rows
        .iter()
        .map(|&r| (dist2(&points[r * dim..(r + 1) * dim], to), r))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<usize> = scored[..k].iter().map(|&(_, r)| r).collect();
    out.sort_unstable();
    out
}
