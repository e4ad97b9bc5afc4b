//! File formats: dataset and hierarchy CSVs, schema JSON, edge lists,
//! semantic groupings and the JSON-lines budget ledger.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anonybench_core::dp::LedgerEntry;
use anonybench_core::graph::Graph;
use anonybench_core::{AttributeSchema, Dataset, Hierarchy, IngestLog, Kind, Role};
use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaConfig {
    pub attributes: Vec<AttributeSchema>,
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn parse_schema(json: &str) -> Result<SchemaConfig> {
    serde_json::from_str(json).context("schema JSON")
}

/// Header and rows of comma-separated text; rows may be ragged so that the
/// dataset loader can report them by line.
pub fn parse_csv(text: &str, delimiter: u8, has_header: bool) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("CSV line {}", i + 1))?;
        rows.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let header = if has_header {
        if rows.is_empty() {
            bail!("CSV has no header row");
        }
        rows.remove(0)
    } else {
        Vec::new()
    };
    Ok((header, rows))
}

pub fn load_dataset(csv_text: &str, schema: &SchemaConfig) -> Result<(Dataset, IngestLog)> {
    let (header, rows) = parse_csv(csv_text, b',', true)?;
    Ok(Dataset::from_rows(&header, &rows, &schema.attributes)?)
}

/// Loads an auxiliary table (external or population data) whose columns are
/// a different subset: known columns take their schema entry, the rest are
/// dropped as identifiers.
pub fn load_auxiliary(csv_text: &str, schema: &SchemaConfig) -> Result<Dataset> {
    let (header, rows) = parse_csv(csv_text, b',', true)?;
    let attributes: Vec<AttributeSchema> = header
        .iter()
        .map(|h| {
            let h = h.trim();
            schema
                .attributes
                .iter()
                .find(|a| a.name == h)
                .cloned()
                .unwrap_or_else(|| AttributeSchema::new(h, Role::DirectIdentifier, Kind::Categorical))
        })
        .collect();
    Ok(Dataset::from_rows(&header, &rows, &attributes)?.0)
}

/// A dataset as CSV: header of attribute names, one line per record.
pub fn dataset_csv(data: &Dataset) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(data.schema().iter().map(|a| a.name.as_str()))?;
    for rec in data.records() {
        w.write_record(rec.iter().map(|v| v.label().into_owned()))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

/// `leaf;level1;...;*` rows. Files without any `;` are read as
/// comma-separated.
pub fn parse_hierarchy_rows(text: &str) -> Result<Vec<Vec<String>>> {
    let delimiter = if text.contains(';') { b';' } else { b',' };
    let (_, rows) = parse_csv(text, delimiter, false)?;
    Ok(rows.into_iter().filter(|r| !(r.len() == 1 && r[0].trim().is_empty())).collect())
}

pub fn load_hierarchy(text: &str, attribute: &str, data: &Dataset) -> Result<Hierarchy> {
    Ok(Hierarchy::from_rows(attribute, &parse_hierarchy_rows(text)?, Some(data))?)
}

pub fn hierarchy_csv(h: &Hierarchy) -> String {
    let mut out = String::new();
    for row in h.to_rows() {
        out.push_str(&row.join(";"));
        out.push('\n');
    }
    out
}

fn parse_id(s: &str) -> Option<usize> {
    s.trim().parse().ok()
}

/// Undirected `src,dst` edge list with zero-based ids; a non-numeric first
/// line is taken as a header. The node count is the largest id plus one
/// unless `nodes` is given.
pub fn parse_edge_list(text: &str, nodes: Option<usize>) -> Result<Graph> {
    let (_, rows) = parse_csv(text, b',', false)?;
    let mut edges = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() == 1 && row[0].trim().is_empty() {
            continue;
        }
        if row.len() != 2 {
            bail!("edge list line {}: expected 2 columns, found {}", i + 1, row.len());
        }
        match (parse_id(&row[0]), parse_id(&row[1])) {
            (Some(a), Some(b)) => edges.push((a, b)),
            _ if i == 0 => continue,
            _ => bail!("edge list line {}: ids must be non-negative integers", i + 1),
        }
    }
    let max = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    let n = match nodes {
        Some(n) if n < max => bail!("edge list uses id {} but the graph has {n} nodes", max - 1),
        Some(n) => n,
        None => max,
    };
    Ok(Graph::new(n, edges)?)
}

pub fn edge_list_csv(g: &Graph) -> String {
    let mut out = String::from("src,dst\n");
    for (a, b) in g.edges() {
        out.push_str(&format!("{a},{b}\n"));
    }
    out
}

/// Two-column `value,group` CSV; a `value,group` header line is skipped.
pub fn parse_grouping(text: &str) -> Result<BTreeMap<String, String>> {
    let (_, rows) = parse_csv(text, b',', false)?;
    let mut map = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        if row.len() == 1 && row[0].trim().is_empty() {
            continue;
        }
        if row.len() != 2 {
            bail!("grouping line {}: expected 2 columns, found {}", i + 1, row.len());
        }
        let (value, group) = (row[0].trim(), row[1].trim());
        if i == 0 && value == "value" && group == "group" {
            continue;
        }
        if let Some(old) = map.insert(value.to_string(), group.to_string()) {
            if old != group {
                bail!("grouping assigns `{value}` to both `{old}` and `{group}`");
            }
        }
    }
    Ok(map)
}

pub fn grouping_csv(pairs: &[(String, String)]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["value", "group"]).expect("in-memory write");
    for (v, g) in pairs {
        w.write_record([v, g]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

pub fn ledger_jsonl(entries: &[LedgerEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("ledger entries serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_ledger(text: &str) -> Result<Vec<LedgerEntry>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("ledger line {}", i + 1)))
        .collect()
}
