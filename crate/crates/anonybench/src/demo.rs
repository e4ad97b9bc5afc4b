//! The `generate` subcommand: a synthetic admissions population, the
//! released sample, an identified external table, hierarchies, a semantic
//! grouping, a random contact graph and a run config tying them together.

use std::path::{Path, PathBuf};

use anonybench_core::attacks::admissions::{admissions_hierarchies, admissions_spec, diagnosis_grouping, AGE_RANGE};
use anonybench_core::attacks::{generate_synthetic, SyntheticSpec};
use anonybench_core::{AttributeSchema, Dataset, Kind, Role};
use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use crate::engine::to_json;
use crate::io::{grouping_csv, hierarchy_csv, write_text, SchemaConfig};

pub const ID_COLUMN: &str = "patient_id";
pub const GRAPH_NODES: usize = 60;
pub const GRAPH_EDGE_PROBABILITY: f64 = 0.08;

/// Table CSV with a leading identifier column `p00001, p00002, ...`.
fn identified_csv(data: &Dataset, columns: &[usize], first: usize, count: usize) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec![ID_COLUMN.to_string()];
    header.extend(columns.iter().map(|&c| data.schema()[c].name.clone()));
    w.write_record(&header)?;
    for r in first..first + count {
        let mut row = vec![format!("p{:05}", r + 1)];
        row.extend(columns.iter().map(|&c| data.value(r, c).label().into_owned()));
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}

fn schema_config(data: &Dataset, numeric_bounds: &[(&str, (f64, f64))]) -> SchemaConfig {
    let mut attributes = vec![AttributeSchema::new(ID_COLUMN, Role::DirectIdentifier, Kind::Categorical)];
    attributes.extend(data.schema().iter().map(|a| {
        let mut a = AttributeSchema::new(a.name.clone(), a.role, a.kind);
        if let Some((_, (lo, hi))) = numeric_bounds.iter().find(|(n, _)| *n == a.name) {
            a = a.with_bounds(*lo, *hi);
        }
        a
    }));
    SchemaConfig { attributes }
}

fn random_edges(nodes: usize, p: f64, seed: u64) -> String {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = String::from("src,dst\n");
    for a in 0..nodes {
        for b in a + 1..nodes {
            if rng.random_bool(p) {
                out.push_str(&format!("{a},{b}\n"));
            }
        }
    }
    out
}

/// Files written by [`generate_demo`], relative to its output directory.
pub fn generate_demo(out: &Path, rows: usize, seed: u64) -> Result<Vec<PathBuf>> {
    // the release is the first half of a population twice its size
    let population = generate_synthetic(&admissions_spec(2 * rows, seed))?;
    let hs = admissions_hierarchies(&population)?;
    let all: Vec<usize> = (0..population.schema().len()).collect();
    let qids = population.qid_indices();
    let schema = schema_config(&population, &[("age", AGE_RANGE)]);

    let mut files: Vec<(PathBuf, String)> = vec![
        ("spec.json".into(), to_json(&admissions_spec(2 * rows, seed))),
        ("schema.json".into(), to_json(&schema)),
        ("data.csv".into(), identified_csv(&population, &all, 0, rows)?),
        ("population.csv".into(), identified_csv(&population, &all, 0, 2 * rows)?),
        ("external.csv".into(), identified_csv(&population, &qids, 0, 2 * rows)?),
        ("diagnosis_groups.csv".into(), grouping_csv(&diagnosis_grouping())),
        ("graph.csv".into(), random_edges(GRAPH_NODES, GRAPH_EDGE_PROBABILITY, seed)),
    ];
    for h in hs.iter() {
        files.push((PathBuf::from("hierarchies").join(format!("{}.csv", h.attribute())), hierarchy_csv(h)));
    }
    let config = json!({
        "dataset": "data.csv",
        "schema": "schema.json",
        "hierarchies": "hierarchies",
        "constraints": [
            {"model": "k-anonymity", "k": 10},
            {"model": "l-diversity-distinct", "l": 2, "sensitive": "diagnosis"}
        ],
        "suppression_limit": 0.0,
        "seed": seed,
        "attacks": {
            "linkage": {"external": "external.csv"},
            "homogeneity": {"sensitive": "diagnosis", "threshold": 0.8, "grouping": "diagnosis_groups.csv"},
            "membership": {"population": "population.csv"},
            "reconstruction": {"target": "ethnicity", "known_fraction": 0.5, "features": ["heart_rate", "glucose"]}
        },
        "graph": {"edges": "graph.csv", "k": 3},
        "dp": {
            "total_epsilon": 1.0,
            "queries": [
                {"type": "count", "where": {"gender": "F"}, "epsilon": 0.4},
                {"type": "histogram", "attribute": "diagnosis", "epsilon": 0.4},
                {"type": "count", "where": {"ethnicity": "ASIAN", "gender": "M"}, "epsilon": 0.4}
            ]
        }
    });
    files.push(("config.json".into(), to_json(&config)));
    for (p, text) in &files {
        write_text(&out.join(p), text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// Data and schema for a user-supplied synthetic spec.
pub fn generate_from_spec(out: &Path, spec: &SyntheticSpec) -> Result<Vec<PathBuf>> {
    let data = generate_synthetic(spec)?;
    let all: Vec<usize> = (0..data.schema().len()).collect();
    let bounds: Vec<(&str, (f64, f64))> = spec
        .features
        .iter()
        .filter_map(|f| f.bounds.map(|b| (f.name.as_str(), b)))
        .collect();
    let files: Vec<(PathBuf, String)> = vec![
        ("schema.json".into(), to_json(&schema_config(&data, &bounds))),
        ("data.csv".into(), identified_csv(&data, &all, 0, data.len())?),
    ];
    for (p, text) in &files {
        write_text(&out.join(p), text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
