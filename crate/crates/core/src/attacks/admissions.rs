//! A synthetic hospital-admissions table with eight demographic
//! quasi-identifiers, a sensitive diagnosis and two vital-sign features,
//! plus the generalization hierarchies that go with it.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::synthetic::{DemographicSpec, Effect, FeatureSpec, SyntheticSpec};
use crate::dataset::{Dataset, Role};
use crate::hierarchy::{Hierarchy, HierarchySet};
use crate::Result;

/// Age bins in the demo hierarchy.
pub const AGE_BINS: usize = 5;
pub const AGE_RANGE: (f64, f64) = (0.0, 100.0);

/// `(attribute, [leaf, level 1, ...])` chains of the categorical QIDs.
const TREES: &[(&str, &[&[&str]])] = &[
    (
        "ethnicity",
        &[
            &["WHITE", "white", "*"],
            &["BLACK", "non-white", "*"],
            &["ASIAN", "non-white", "*"],
            &["HISPANIC", "non-white", "*"],
            &["OTHER", "non-white", "*"],
        ],
    ),
    (
        "admission_type",
        &[
            &["EMERGENCY", "unplanned", "*"],
            &["URGENT", "unplanned", "*"],
            &["ELECTIVE", "planned", "*"],
            &["NEWBORN", "planned", "*"],
        ],
    ),
    (
        "marital_status",
        &[
            &["MARRIED", "partnered", "*"],
            &["LIFE PARTNER", "partnered", "*"],
            &["SINGLE", "unpartnered", "*"],
            &["WIDOWED", "unpartnered", "*"],
            &["DIVORCED", "unpartnered", "*"],
            &["SEPARATED", "unpartnered", "*"],
        ],
    ),
    (
        "insurance",
        &[
            &["Medicare", "public", "*"],
            &["Medicaid", "public", "*"],
            &["Government", "public", "*"],
            &["Private", "private", "*"],
            &["Self Pay", "private", "*"],
        ],
    ),
    (
        "religion",
        &[
            &["GREEK ORTHODOX", "orthodox", "christian", "*"],
            &["PROTESTANT", "protestant-family", "christian", "*"],
            &["METHODIST", "protestant-family", "christian", "*"],
            &["CHRISTIAN SCIENTIST", "protestant-family", "christian", "*"],
            &["CATHOLIC", "catholic", "christian", "*"],
            &["JEWISH", "jewish", "non-christian", "*"],
            &["OTHER", "other", "non-christian", "*"],
        ],
    ),
    ("gender", &[&["M", "*"], &["F", "*"]]),
    (
        "language",
        &[
            &["ENGL", "english", "*"],
            &["SPAN", "other", "*"],
            &["RUSS", "other", "*"],
            &["PORT", "other", "*"],
            &["CANT", "other", "*"],
            &["MAND", "other", "*"],
        ],
    ),
];

const MARGINALS: &[(&str, &[f64])] = &[
    ("ethnicity", &[0.70, 0.10, 0.04, 0.04, 0.12]),
    ("admission_type", &[0.70, 0.03, 0.17, 0.10]),
    ("marital_status", &[0.45, 0.01, 0.28, 0.15, 0.09, 0.02]),
    ("insurance", &[0.48, 0.10, 0.03, 0.38, 0.01]),
    ("religion", &[0.02, 0.15, 0.03, 0.01, 0.38, 0.09, 0.32]),
    ("gender", &[0.56, 0.44]),
    ("language", &[0.80, 0.08, 0.04, 0.04, 0.02, 0.02]),
];

const DIAGNOSES: &[&str] = &["sepsis", "pneumonia", "heart failure", "gastric ulcer", "gastritis", "stomach cancer"];

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Categorical hierarchy chains per QID, as CSV-style rows.
pub fn hierarchy_rows() -> Vec<(String, Vec<Vec<String>>)> {
    TREES
        .iter()
        .map(|(name, rows)| (name.to_string(), rows.iter().map(|r| strings(r)).collect()))
        .collect()
}

pub fn admissions_spec(n: usize, seed: u64) -> SyntheticSpec {
    let mut demographics: Vec<DemographicSpec> = TREES
        .iter()
        .zip(MARGINALS)
        .map(|((name, rows), (m, probabilities))| {
            debug_assert_eq!(name, m);
            DemographicSpec {
                name: name.to_string(),
                categories: rows.iter().map(|r| r[0].to_string()).collect(),
                probabilities: probabilities.to_vec(),
                role: Role::QuasiIdentifier,
            }
        })
        .collect();
    demographics.push(DemographicSpec {
        name: "diagnosis".into(),
        categories: strings(DIAGNOSES),
        probabilities: vec![0.25, 0.25, 0.2, 0.1, 0.1, 0.1],
        role: Role::Sensitive,
    });
    SyntheticSpec {
        n,
        seed,
        demographics,
        features: vec![
            FeatureSpec {
                name: "age".into(),
                mean: 55.0,
                noise_sd: 20.0,
                effects: Vec::new(),
                role: Role::QuasiIdentifier,
                round: true,
                bounds: Some(AGE_RANGE),
            },
            FeatureSpec {
                name: "heart_rate".into(),
                mean: 80.0,
                noise_sd: 12.0,
                effects: vec![Effect {
                    demographic: "ethnicity".into(),
                    strength: 0.5,
                    shifts: vec![0.0, 8.0, -6.0, 4.0, 0.0],
                }],
                role: Role::Insensitive,
                round: true,
                bounds: None,
            },
            FeatureSpec {
                name: "glucose".into(),
                mean: 110.0,
                noise_sd: 20.0,
                effects: vec![Effect {
                    demographic: "diagnosis".into(),
                    strength: 0.5,
                    shifts: vec![30.0, 0.0, 10.0, 0.0, 0.0, -10.0],
                }],
                role: Role::Insensitive,
                round: true,
                bounds: None,
            },
        ],
    }
}

/// Hierarchies for every QID of an admissions table.
pub fn admissions_hierarchies(data: &Dataset) -> Result<HierarchySet> {
    let mut hs = HierarchySet::new();
    for (name, rows) in hierarchy_rows() {
        hs.insert(Hierarchy::from_rows(&name, &rows, Some(data))?);
    }
    let age = data.attribute_index("age")?;
    hs.insert(Hierarchy::bin_numeric_over(
        "age",
        &data.numeric_column(age),
        AGE_BINS,
        AGE_RANGE.0,
        AGE_RANGE.1,
    )?);
    Ok(hs)
}

/// The stomach-disease semantic grouping used with the homogeneity attack.
pub fn diagnosis_grouping() -> Vec<(String, String)> {
    [
        ("gastric ulcer", "stomach"),
        ("gastritis", "stomach"),
        ("stomach cancer", "stomach"),
        ("pneumonia", "respiratory"),
        ("sepsis", "infection"),
        ("heart failure", "cardiac"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}
