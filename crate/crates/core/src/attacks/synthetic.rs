//! Seeded synthetic microdata with planted feature/demographic correlations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeSchema, Dataset, Kind, Role, Value};
use crate::math::{std_normal, unit_f64};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicSpec {
    pub name: String,
    pub categories: Vec<String>,
    pub probabilities: Vec<f64>,
    #[serde(default = "default_role")]
    pub role: Role,
}

fn default_role() -> Role {
    Role::QuasiIdentifier
}

/// Adds `strength * shifts[c]` to a feature for records in category `c` of
/// `demographic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub demographic: String,
    pub strength: f64,
    pub shifts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(default)]
    pub mean: f64,
    #[serde(default = "one")]
    pub noise_sd: f64,
    #[serde(default)]
    pub effects: Vec<Effect>,
    #[serde(default = "insensitive")]
    pub role: Role,
    /// Round values to integers.
    #[serde(default)]
    pub round: bool,
    /// Clamp values into `[min, max]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
}

fn one() -> f64 {
    1.0
}

fn insensitive() -> Role {
    Role::Insensitive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub seed: u64,
    pub demographics: Vec<DemographicSpec>,
    #[serde(default)]
    pub features: Vec<FeatureSpec>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid("synthetic table needs n >= 1".into()));
        }
        for d in &self.demographics {
            if d.categories.is_empty() || d.categories.len() != d.probabilities.len() {
                return Err(Error::Invalid(format!(
                    "demographic {}: {} categories but {} probabilities",
                    d.name,
                    d.categories.len(),
                    d.probabilities.len()
                )));
            }
            if d.probabilities.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Invalid(format!("demographic {}: probability outside [0, 1]", d.name)));
            }
            let total: f64 = d.probabilities.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Invalid(format!("demographic {}: marginals sum to {total}", d.name)));
            }
        }
        for f in &self.features {
            if !(f.noise_sd >= 0.0 && f.noise_sd.is_finite()) {
                return Err(Error::Invalid(format!("feature {}: bad noise_sd", f.name)));
            }
            if let Some((lo, hi)) = f.bounds {
                if !(lo < hi) {
                    return Err(Error::Invalid(format!("feature {}: bounds need min < max", f.name)));
                }
            }
            for e in &f.effects {
                let d = self.demographic_index(&e.demographic).ok_or_else(|| {
                    Error::Invalid(format!("feature {}: unknown demographic {}", f.name, e.demographic))
                })?;
                if !(0.0..=1.0).contains(&e.strength) {
                    return Err(Error::Invalid(format!("feature {}: strength outside [0, 1]", f.name)));
                }
                if e.shifts.len() != self.demographics[d].categories.len() {
                    return Err(Error::Invalid(format!(
                        "feature {}: {} shifts for {} categories",
                        f.name,
                        e.shifts.len(),
                        self.demographics[d].categories.len()
                    )));
                }
            }
        }
        Ok(())
    }

    fn demographic_index(&self, name: &str) -> Option<usize> {
        self.demographics.iter().position(|d| d.name == name)
    }
}

fn draw(rng: &mut ChaCha20Rng, probabilities: &[f64]) -> usize {
    let u = unit_f64(rng);
    let mut acc = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding can leave the cumulative sum just below 1
    probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Demographic columns first (spec order), then features.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut schema: Vec<AttributeSchema> = spec
        .demographics
        .iter()
        .map(|d| AttributeSchema::new(d.name.clone(), d.role, Kind::Categorical))
        .collect();
    schema.extend(spec.features.iter().map(|f| {
        let a = AttributeSchema::new(f.name.clone(), f.role, Kind::Numeric);
        match f.bounds {
            Some((lo, hi)) => a.with_bounds(lo, hi),
            None => a,
        }
    }));
    let effects: Vec<Vec<(usize, &Effect)>> = spec
        .features
        .iter()
        .map(|f| {
            f.effects
                .iter()
                .map(|e| (spec.demographic_index(&e.demographic).expect("validated"), e))
                .collect()
        })
        .collect();

    let mut records = Vec::with_capacity(spec.n);
    let mut cats = Vec::with_capacity(spec.demographics.len());
    for _ in 0..spec.n {
        cats.clear();
        let mut rec = Vec::with_capacity(schema.len());
        for d in &spec.demographics {
            let c = draw(&mut rng, &d.probabilities);
            cats.push(c);
            rec.push(Value::text(d.categories[c].clone()));
        }
        for (f, fx) in spec.features.iter().zip(&effects) {
            let mut x = f.mean + f.noise_sd * std_normal(&mut rng);
            for &(d, e) in fx {
                x += e.strength * e.shifts[cats[d]];
            }
            if f.round {
                x = libm::round(x);
            }
            if let Some((lo, hi)) = f.bounds {
                x = x.clamp(lo, hi);
            }
            rec.push(Value::Number(x));
        }
        records.push(rec);
    }
    Dataset::new(schema, records)
}
