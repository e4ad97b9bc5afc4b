//! Laplace-noised count queries under a sequential-composition budget.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::math::{ln, unit_f64};
use crate::{Error, Result};

/// Slack allowed when comparing spent budget against the total.
pub const BUDGET_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub query: String,
    pub epsilon: f64,
    /// Position of the charge in the ledger, starting at 1.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetAccountant {
    total_epsilon: f64,
    spent: f64,
    ledger: Vec<LedgerEntry>,
}

impl BudgetAccountant {
    pub fn new(total_epsilon: f64) -> Result<Self> {
        if !(total_epsilon > 0.0 && total_epsilon.is_finite()) {
            return Err(Error::Invalid(format!("total epsilon {total_epsilon} must be positive and finite")));
        }
        Ok(BudgetAccountant {
            total_epsilon,
            spent: 0.0,
            ledger: Vec::new(),
        })
    }

    pub fn total_epsilon(&self) -> f64 {
        self.total_epsilon
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn remaining(&self) -> f64 {
        (self.total_epsilon - self.spent).max(0.0)
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    /// Debits `epsilon` or refuses without changing any state.
    pub fn charge(&mut self, query: impl Into<String>, epsilon: f64) -> Result<()> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Invalid(format!("epsilon {epsilon} must be positive and finite")));
        }
        if self.spent + epsilon > self.total_epsilon + BUDGET_EPS {
            return Err(Error::BudgetExhausted {
                requested: epsilon,
                remaining: self.remaining(),
            });
        }
        self.spent += epsilon;
        self.ledger.push(LedgerEntry {
            query: query.into(),
            epsilon,
            timestamp: self.ledger.len() as u64 + 1,
        });
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisyAnswer {
    pub value: f64,
    pub epsilon_charged: f64,
    /// Laplace scale `b = sensitivity / epsilon`.
    pub scale: f64,
    pub query: String,
}

/// One Laplace(0, `scale`) sample by inverse CDF.
pub fn laplace_noise<R: rand::RngCore + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    loop {
        let u = unit_f64(rng) - 0.5;
        let tail = 1.0 - 2.0 * u.abs();
        if tail > 0.0 {
            return -scale * u.signum() * ln(tail);
        }
    }
}

/// `attribute=value` conjunction.
pub type Predicate = [(String, String)];

fn describe(predicate: &Predicate) -> String {
    if predicate.is_empty() {
        return String::from("count(*)");
    }
    let parts: Vec<String> = predicate.iter().map(|(a, v)| format!("{a}={v}")).collect();
    format!("count({})", parts.join(" AND "))
}

fn true_count(dataset: &Dataset, predicate: &Predicate) -> Result<usize> {
    let cols: Vec<(usize, &str)> = predicate
        .iter()
        .map(|(a, v)| Ok((dataset.attribute_index(a)?, v.as_str())))
        .collect::<Result<_>>()?;
    Ok(dataset
        .records()
        .iter()
        .filter(|rec| cols.iter().all(|&(i, v)| rec[i].label() == v))
        .count())
}

/// Seeded query engine: one random stream shared by all queries so that a
/// fixed seed and query sequence reproduce answers and ledger exactly.
#[derive(Debug, Clone)]
pub struct DpEngine {
    rng: ChaCha20Rng,
    accountant: BudgetAccountant,
}

impl DpEngine {
    pub fn new(total_epsilon: f64, seed: u64) -> Result<Self> {
        Ok(DpEngine {
            rng: ChaCha20Rng::seed_from_u64(seed),
            accountant: BudgetAccountant::new(total_epsilon)?,
        })
    }

    pub fn accountant(&self) -> &BudgetAccountant {
        &self.accountant
    }

    pub fn count(&mut self, dataset: &Dataset, predicate: &Predicate, epsilon: f64) -> Result<NoisyAnswer> {
        count_with(dataset, predicate, epsilon, &mut self.accountant, &mut self.rng)
    }

    pub fn histogram(&mut self, dataset: &Dataset, attribute: &str, epsilon: f64) -> Result<BTreeMap<String, NoisyAnswer>> {
        histogram_with(dataset, attribute, epsilon, &mut self.accountant, &mut self.rng)
    }
}

fn count_with<R: rand::RngCore>(
    dataset: &Dataset,
    predicate: &Predicate,
    epsilon: f64,
    accountant: &mut BudgetAccountant,
    rng: &mut R,
) -> Result<NoisyAnswer> {
    let truth = true_count(dataset, predicate)?;
    let query = describe(predicate);
    accountant.charge(query.clone(), epsilon)?;
    let scale = 1.0 / epsilon;
    Ok(NoisyAnswer {
        value: truth as f64 + laplace_noise(rng, scale),
        epsilon_charged: epsilon,
        scale,
        query,
    })
}

fn histogram_with<R: rand::RngCore>(
    dataset: &Dataset,
    attribute: &str,
    epsilon: f64,
    accountant: &mut BudgetAccountant,
    rng: &mut R,
) -> Result<BTreeMap<String, NoisyAnswer>> {
    let idx = dataset.attribute_index(attribute)?;
    if dataset.schema()[idx].is_numeric() {
        return Err(Error::Invalid(format!("histogram attribute {attribute} must be categorical")));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for v in dataset.column(idx) {
        *counts.entry(v.label().into_owned()).or_insert(0) += 1;
    }
    let query = format!("histogram({attribute})");
    // buckets are disjoint, so one charge covers all of them
    accountant.charge(query, epsilon)?;
    let scale = 1.0 / epsilon;
    Ok(counts
        .into_iter()
        .map(|(value, c)| {
            let answer = NoisyAnswer {
                value: c as f64 + laplace_noise(rng, scale),
                epsilon_charged: epsilon,
                scale,
                query: format!("count({attribute}={value})"),
            };
            (value, answer)
        })
        .collect())
}

/// Noisy count of records matching `predicate`, seeded by `seed`.
pub fn dp_count(
    dataset: &Dataset,
    predicate: &Predicate,
    epsilon: f64,
    accountant: &mut BudgetAccountant,
    seed: u64,
) -> Result<NoisyAnswer> {
    count_with(dataset, predicate, epsilon, accountant, &mut ChaCha20Rng::seed_from_u64(seed))
}

/// Noisy per-value counts of a categorical attribute; one ledger entry.
pub fn dp_histogram(
    dataset: &Dataset,
    attribute: &str,
    epsilon: f64,
    accountant: &mut BudgetAccountant,
    seed: u64,
) -> Result<BTreeMap<String, NoisyAnswer>> {
    histogram_with(dataset, attribute, epsilon, accountant, &mut ChaCha20Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeSchema, Kind, Role, Value};
    use alloc::vec;

    fn table() -> Dataset {
        Dataset::new(
            vec![AttributeSchema::new("dx", Role::Sensitive, Kind::Categorical)],
            ["flu", "flu", "cold"].iter().map(|v| vec![Value::text(*v)]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn composition_refuses_third_query() {
        let d = table();
        let mut acc = BudgetAccountant::new(1.0).unwrap();
        dp_count(&d, &[], 0.3, &mut acc, 1).unwrap();
        dp_count(&d, &[], 0.3, &mut acc, 2).unwrap();
        let before = acc.clone();
        let err = dp_count(&d, &[], 0.5, &mut acc, 3).unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { .. }));
        assert_eq!(acc, before);
        assert_eq!(acc.ledger().len(), 2);
    }

    #[test]
    fn huge_epsilon_is_exact_enough() {
        let d = table();
        let mut acc = BudgetAccountant::new(1e7).unwrap();
        let pred = [(String::from("dx"), String::from("flu"))];
        let a = dp_count(&d, &pred, 1e6, &mut acc, 9).unwrap();
        assert!((a.value - 2.0).abs() < 1e-4);
        assert_eq!(a.scale, 1e-6);
        assert_eq!(a.query, "count(dx=flu)");
    }

    #[test]
    fn histogram_charges_once() {
        let d = table();
        let mut acc = BudgetAccountant::new(1.0).unwrap();
        let h = dp_histogram(&d, "dx", 0.5, &mut acc, 4).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(acc.spent(), 0.5);
        assert_eq!(acc.ledger().len(), 1);
    }

    #[test]
    fn exact_budget_fill_is_allowed() {
        let mut acc = BudgetAccountant::new(1.0).unwrap();
        for _ in 0..10 {
            acc.charge("q", 0.1).unwrap();
        }
        assert!(acc.charge("q", 0.1).is_err());
        assert!(acc.remaining() >= 0.0);
    }

    #[test]
    fn bad_epsilon() {
        assert!(BudgetAccountant::new(0.0).is_err());
        let mut acc = BudgetAccountant::new(1.0).unwrap();
        assert!(acc.charge("q", -1.0).is_err());
        assert!(acc.charge("q", f64::NAN).is_err());
    }
}
