//! The fixed baseline classifier: multinomial logistic regression on
//! standardized features, trained by full-batch gradient descent.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::dataset::{Dataset, Value};
use crate::hierarchy::Interval;
use crate::math::{exp, sqrt, unit_f64};
use crate::Result;

pub const EPOCHS: usize = 500;
pub const LEARNING_RATE: f64 = 0.1;
pub const INIT_RANGE: f64 = 0.01;

/// Turns table columns into a numeric design matrix. Numeric attributes map
/// to one column (interval labels to their midpoint, other cells to the
/// training mean); categorical attributes are one-hot encoded over the
/// training labels.
#[derive(Debug, Clone)]
pub struct Encoder {
    columns: Vec<EncodedColumn>,
}

#[derive(Debug, Clone)]
enum EncodedColumn {
    Numeric { attribute: usize, fill: f64 },
    OneHot { attribute: usize, labels: Vec<String> },
}

fn numeric_cell(v: &Value) -> Option<f64> {
    match v {
        Value::Number(x) => Some(*x),
        Value::Text(s) => Interval::parse(s).map(|iv| iv.midpoint()).or_else(|| s.parse().ok()),
        Value::Missing | Value::Suppressed => None,
    }
}

impl Encoder {
    pub fn fit(train: &Dataset, features: &[usize]) -> Encoder {
        let columns = features
            .iter()
            .map(|&a| {
                if train.schema()[a].is_numeric() {
                    let xs: Vec<f64> = train.column(a).filter_map(numeric_cell).collect();
                    let fill = if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
                    EncodedColumn::Numeric { attribute: a, fill }
                } else {
                    let mut labels = train.distinct_labels(a);
                    labels.sort();
                    EncodedColumn::OneHot { attribute: a, labels }
                }
            })
            .collect();
        Encoder { columns }
    }

    pub fn width(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match c {
                EncodedColumn::Numeric { .. } => 1,
                EncodedColumn::OneHot { labels, .. } => labels.len(),
            })
            .sum()
    }

    /// Row-major matrix with [`Encoder::width`] columns.
    pub fn transform(&self, data: &Dataset) -> Vec<f64> {
        let w = self.width();
        let mut out = vec![0.0; data.len() * w];
        for (r, rec) in data.records().iter().enumerate() {
            let row = &mut out[r * w..(r + 1) * w];
            let mut j = 0;
            for c in &self.columns {
                match c {
                    EncodedColumn::Numeric { attribute, fill } => {
                        row[j] = numeric_cell(&rec[*attribute]).unwrap_or(*fill);
                        j += 1;
                    }
                    EncodedColumn::OneHot { attribute, labels } => {
                        let l = rec[*attribute].label();
                        if let Ok(p) = labels.binary_search_by(|x| x.as_str().cmp(l.as_ref())) {
                            row[j + p] = 1.0;
                        }
                        j += labels.len();
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SoftmaxClassifier {
    dim: usize,
    classes: usize,
    means: Vec<f64>,
    sds: Vec<f64>,
    /// `classes` rows of `dim + 1` weights, bias last.
    weights: Vec<f64>,
}

impl SoftmaxClassifier {
    /// Trains on a row-major `x` with `dim` columns and labels in `0..classes`.
    pub fn fit(x: &[f64], dim: usize, y: &[usize], classes: usize, seed: u64) -> SoftmaxClassifier {
        let n = y.len();
        let mut means = vec![0.0; dim];
        let mut sds = vec![0.0; dim];
        for j in 0..dim {
            let m = (0..n).map(|r| x[r * dim + j]).sum::<f64>() / n as f64;
            let v = (0..n).map(|r| (x[r * dim + j] - m) * (x[r * dim + j] - m)).sum::<f64>() / n as f64;
            means[j] = m;
            sds[j] = sqrt(v);
        }
        let mut model = SoftmaxClassifier {
            dim,
            classes,
            means,
            sds,
            weights: Vec::new(),
        };
        let z = model.standardize(x, n);
        let stride = dim + 1;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut w: Vec<f64> = (0..classes * stride)
            .map(|_| (2.0 * unit_f64(&mut rng) - 1.0) * INIT_RANGE)
            .collect();
        let mut grad = vec![0.0; w.len()];
        let mut p = vec![0.0; classes];
        for _ in 0..EPOCHS {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for r in 0..n {
                let row = &z[r * dim..(r + 1) * dim];
                softmax_into(&w, row, classes, &mut p);
                p[y[r]] -= 1.0;
                for c in 0..classes {
                    let g = &mut grad[c * stride..(c + 1) * stride];
                    for j in 0..dim {
                        g[j] += p[c] * row[j];
                    }
                    g[dim] += p[c];
                }
            }
            let scale = LEARNING_RATE / n as f64;
            for (wi, gi) in w.iter_mut().zip(&grad) {
                *wi -= scale * gi;
            }
        }
        model.weights = w;
        model
    }

    fn standardize(&self, x: &[f64], n: usize) -> Vec<f64> {
        let dim = self.dim;
        let mut z = vec![0.0; n * dim];
        for r in 0..n {
            for j in 0..dim {
                z[r * dim + j] = if self.sds[j] > 0.0 {
                    (x[r * dim + j] - self.means[j]) / self.sds[j]
                } else {
                    0.0
                };
            }
        }
        z
    }

    pub fn predict(&self, x: &[f64]) -> Vec<usize> {
        let n = if self.dim == 0 { 0 } else { x.len() / self.dim };
        let z = self.standardize(x, n);
        let mut p = vec![0.0; self.classes];
        (0..n)
            .map(|r| {
                softmax_into(&self.weights, &z[r * self.dim..(r + 1) * self.dim], self.classes, &mut p);
                argmax(&p)
            })
            .collect()
    }
}

fn softmax_into(w: &[f64], row: &[f64], classes: usize, out: &mut [f64]) {
    let stride = row.len() + 1;
    let mut max = f64::NEG_INFINITY;
    for c in 0..classes {
        let wc = &w[c * stride..(c + 1) * stride];
        let s = wc[row.len()] + row.iter().zip(wc).map(|(a, b)| a * b).sum::<f64>();
        out[c] = s;
        max = max.max(s);
    }
    let mut total = 0.0;
    for o in out.iter_mut().take(classes) {
        *o = exp(*o - max);
        total += *o;
    }
    for o in out.iter_mut().take(classes) {
        *o /= total;
    }
}

/// First index of the maximum.
fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Accuracy of a model trained on `train` and scored on `test`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub accuracy: f64,
    /// Accuracy of always predicting the training majority class.
    pub baseline: f64,
    /// `false` when training had a single class and no model was fit.
    pub trained: bool,
}

/// Trains on `train` (features and label by index) and scores on `test`.
/// Label values absent from `train` count as errors.
pub fn fit_and_score(train: &Dataset, test: &Dataset, label: usize, features: &[usize], seed: u64) -> Result<Score> {
    // class ids follow sorted label order
    let labels: Vec<String> = train
        .column(label)
        .map(|v| v.label().into_owned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let id = |v: &Value| labels.binary_search_by(|x| x.as_str().cmp(v.label().as_ref())).ok();
    let y_train: Vec<usize> = train.column(label).map(|v| id(v).expect("train label")).collect();
    let y_test: Vec<Option<usize>> = test.column(label).map(id).collect();

    let mut counts = vec![0usize; labels.len()];
    for &c in &y_train {
        counts[c] += 1;
    }
    let majority = argmax_usize(&counts);
    let hits = |pred: &dyn Fn(usize) -> usize| {
        let correct = y_test.iter().enumerate().filter(|(r, y)| **y == Some(pred(*r))).count();
        if y_test.is_empty() {
            0.0
        } else {
            correct as f64 / y_test.len() as f64
        }
    };
    let baseline = hits(&|_| majority);
    if labels.len() < 2 {
        return Ok(Score {
            accuracy: baseline,
            baseline,
            trained: false,
        });
    }
    let enc = Encoder::fit(train, features);
    let dim = enc.width();
    let model = SoftmaxClassifier::fit(&enc.transform(train), dim, &y_train, labels.len(), seed);
    let pred = if dim == 0 {
        vec![majority; test.len()]
    } else {
        model.predict(&enc.transform(test))
    };
    Ok(Score {
        accuracy: hits(&|r| pred[r]),
        baseline,
        trained: true,
    })
}

fn argmax_usize(v: &[usize]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_two_class() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let y: Vec<usize> = (0..100).map(|i| usize::from(i >= 50)).collect();
        let m = SoftmaxClassifier::fit(&x, 1, &y, 2, 1);
        let p = m.predict(&x);
        let acc = p.iter().zip(&y).filter(|(a, b)| a == b).count();
        assert!(acc >= 95, "accuracy {acc}");
    }

    #[test]
    fn constant_feature_is_ignored() {
        let x = vec![3.0; 10];
        let y = vec![0, 0, 0, 0, 0, 0, 0, 1, 1, 1];
        let m = SoftmaxClassifier::fit(&x, 1, &y, 2, 1);
        assert!(m.predict(&[100.0, -100.0]).iter().all(|&c| c == 0));
    }

    #[test]
    fn deterministic_under_seed() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64).collect();
        let y: Vec<usize> = (0..40).map(|i| i % 3).collect();
        let a = SoftmaxClassifier::fit(&x, 1, &y, 3, 9);
        let b = SoftmaxClassifier::fit(&x, 1, &y, 3, 9);
        assert_eq!(a.weights, b.weights);
    }
}
