//! Typed record tables with per-attribute privacy roles.

use alloc::borrow::Cow;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, MISSING, SUPPRESSED};

/// Privacy role of an attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    #[serde(alias = "did")]
    DirectIdentifier,
    #[serde(alias = "qid")]
    QuasiIdentifier,
    #[serde(alias = "sa")]
    Sensitive,
    Insensitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Categorical,
    Numeric,
    OrderedCategorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub role: Role,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    /// Category order for ordered-categorical attributes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

impl AttributeSchema {
    pub fn new(name: impl Into<String>, role: Role, kind: Kind) -> Self {
        AttributeSchema {
            name: name.into(),
            role,
            kind,
            min: None,
            max: None,
            categories: None,
        }
    }

    pub fn with_bounds(mut self, min: f64, max: f64) -> Self {
        self.min = Some(min);
        self.max = Some(max);
        self
    }

    pub fn is_numeric(&self) -> bool {
        self.kind == Kind::Numeric
    }

    /// Declared or observed `[min, max]` of a numeric attribute.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        Some((self.min?, self.max?))
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Number(f64),
    Missing,
    Suppressed,
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    /// The cell as it is written out and matched against hierarchy labels.
    pub fn label(&self) -> Cow<'_, str> {
        match self {
            Value::Text(s) => Cow::Borrowed(s.as_str()),
            Value::Number(x) => Cow::Owned(format_number(*x)),
            Value::Missing => Cow::Borrowed(MISSING),
            Value::Suppressed => Cow::Borrowed(SUPPRESSED),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn is_suppressed(&self) -> bool {
        matches!(self, Value::Suppressed)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

/// Shortest round-trip decimal form (`37`, `37.5`).
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        // no "-0"
        return "0".to_string();
    }
    format!("{x}")
}

/// What ingestion did besides parsing.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestLog {
    pub rows: usize,
    pub columns: usize,
    pub dropped_identifiers: Vec<String>,
    pub missing_cells: usize,
}

/// An immutable table. Every record has one value per schema attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<AttributeSchema>,
    records: Vec<Vec<Value>>,
}

impl Dataset {
    /// Builds a dataset from already typed records, filling in observed
    /// numeric bounds where the schema leaves them open.
    pub fn new(mut schema: Vec<AttributeSchema>, records: Vec<Vec<Value>>) -> Result<Self> {
        validate_schema(&schema)?;
        if records.is_empty() {
            return Err(Error::EmptyTable);
        }
        for (i, rec) in records.iter().enumerate() {
            if rec.len() != schema.len() {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    found: rec.len(),
                    expected: schema.len(),
                });
            }
        }
        fill_bounds(&mut schema, &records)?;
        Ok(Dataset { schema, records })
    }

    /// Same as [`Dataset::new`] but skips value checks; used for releases
    /// whose cells are generalized labels.
    pub(crate) fn from_parts(schema: Vec<AttributeSchema>, records: Vec<Vec<Value>>) -> Self {
        Dataset { schema, records }
    }

    /// Parses string rows against a schema config that names every column.
    ///
    /// Direct identifiers are dropped. Empty and `?` cells become
    /// [`Value::Missing`]; `*` is rejected as a raw value.
    pub fn from_rows(
        header: &[String],
        rows: &[Vec<String>],
        config: &[AttributeSchema],
    ) -> Result<(Self, IngestLog)> {
        validate_schema(config)?;
        let mut seen = BTreeSet::new();
        let mut column_schema = Vec::with_capacity(header.len());
        for col in header {
            let col = col.trim();
            if !seen.insert(col) {
                return Err(Error::HeaderMismatch(format!("duplicate column `{col}`")));
            }
            let s = config
                .iter()
                .find(|a| a.name == col)
                .ok_or_else(|| Error::HeaderMismatch(format!("column `{col}` has no schema entry")))?;
            column_schema.push(s);
        }
        if let Some(a) = config.iter().find(|a| !seen.contains(a.name.as_str())) {
            return Err(Error::HeaderMismatch(format!(
                "schema attribute `{}` is not in the header",
                a.name
            )));
        }
        if rows.is_empty() {
            return Err(Error::EmptyTable);
        }

        let keep: Vec<usize> = column_schema
            .iter()
            .enumerate()
            .filter(|(_, s)| s.role != Role::DirectIdentifier)
            .map(|(i, _)| i)
            .collect();
        let mut log = IngestLog {
            rows: rows.len(),
            columns: keep.len(),
            dropped_identifiers: column_schema
                .iter()
                .filter(|s| s.role == Role::DirectIdentifier)
                .map(|s| s.name.clone())
                .collect(),
            missing_cells: 0,
        };

        let mut records = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            let line = r + 2;
            if row.len() != header.len() {
                return Err(Error::RaggedRow {
                    row: line,
                    found: row.len(),
                    expected: header.len(),
                });
            }
            let mut rec = Vec::with_capacity(keep.len());
            for &c in &keep {
                let s = column_schema[c];
                let token = row[c].as_str();
                let v = parse_cell(token, s, line)?;
                if v == Value::Missing {
                    log.missing_cells += 1;
                }
                rec.push(v);
            }
            records.push(rec);
        }
        let schema: Vec<AttributeSchema> = keep.iter().map(|&c| column_schema[c].clone()).collect();
        Ok((Dataset::new(schema, records)?, log))
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn records(&self) -> &[Vec<Value>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn value(&self, record: usize, attribute: usize) -> &Value {
        &self.records[record][attribute]
    }

    pub fn attribute_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn attribute(&self, name: &str) -> Result<&AttributeSchema> {
        Ok(&self.schema[self.attribute_index(name)?])
    }

    /// Indices of quasi-identifier attributes in schema order.
    pub fn qid_indices(&self) -> Vec<usize> {
        self.indices_with_role(Role::QuasiIdentifier)
    }

    pub fn indices_with_role(&self, role: Role) -> Vec<usize> {
        self.schema
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role == role)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn column(&self, attribute: usize) -> impl Iterator<Item = &Value> + '_ {
        self.records.iter().map(move |r| &r[attribute])
    }

    /// Numbers of a numeric column, skipping missing cells.
    pub fn numeric_column(&self, attribute: usize) -> Vec<f64> {
        self.column(attribute).filter_map(Value::as_number).collect()
    }

    /// Sub-table with the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            records: rows.iter().map(|&r| self.records[r].clone()).collect(),
        }
    }

    /// Copy without one attribute.
    pub fn without_attribute(&self, name: &str) -> Result<Dataset> {
        let idx = self.attribute_index(name)?;
        let mut schema = self.schema.clone();
        schema.remove(idx);
        let records = self
            .records
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.remove(idx);
                r
            })
            .collect();
        Ok(Dataset { schema, records })
    }

    /// Copy with one column replaced; the schema entry is kept.
    pub fn with_column(&self, attribute: usize, values: Vec<Value>) -> Dataset {
        assert_eq!(values.len(), self.len());
        let mut records = self.records.clone();
        for (r, v) in records.iter_mut().zip(values) {
            r[attribute] = v;
        }
        Dataset {
            schema: self.schema.clone(),
            records,
        }
    }

    /// Copy with a different role for one attribute.
    pub fn with_role(&self, name: &str, role: Role) -> Result<Dataset> {
        let idx = self.attribute_index(name)?;
        let mut out = self.clone();
        out.schema[idx].role = role;
        Ok(out)
    }

    /// Distinct labels of a column in first-appearance order.
    pub fn distinct_labels(&self, attribute: usize) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.column(attribute) {
            let l = v.label();
            if !seen.contains(l.as_ref()) {
                seen.insert(l.to_string());
                out.push(l.into_owned());
            }
        }
        out
    }
}

fn parse_cell(token: &str, schema: &AttributeSchema, line: usize) -> Result<Value> {
    let t = token.trim();
    if t.is_empty() || t == MISSING {
        return Ok(Value::Missing);
    }
    if t == SUPPRESSED {
        return Err(Error::ReservedValue {
            row: line,
            column: schema.name.clone(),
        });
    }
    if schema.is_numeric() {
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() => {
                if let Some((lo, hi)) = schema.bounds() {
                    if x < lo || x > hi {
                        return Err(Error::OutOfBounds {
                            row: line,
                            column: schema.name.clone(),
                            value: x,
                            min: lo,
                            max: hi,
                        });
                    }
                }
                Ok(Value::Number(x))
            }
            _ => Err(Error::NotNumeric {
                row: line,
                column: schema.name.clone(),
                token: t.to_string(),
            }),
        }
    } else {
        Ok(Value::Text(token.to_string()))
    }
}

fn validate_schema(schema: &[AttributeSchema]) -> Result<()> {
    let mut names = BTreeSet::new();
    for a in schema {
        if a.name.is_empty() {
            return Err(Error::Schema("attribute with empty name".into()));
        }
        if !names.insert(a.name.as_str()) {
            return Err(Error::Schema(format!("duplicate attribute `{}`", a.name)));
        }
        if a.min.is_some() != a.max.is_some() {
            return Err(Error::Schema(format!(
                "`{}` declares only one of min/max",
                a.name
            )));
        }
        if let Some((lo, hi)) = a.bounds() {
            if !a.is_numeric() {
                return Err(Error::Schema(format!("`{}` has bounds but is not numeric", a.name)));
            }
            if !(lo < hi) {
                return Err(Error::Schema(format!("`{}` requires min < max", a.name)));
            }
        }
    }
    Ok(())
}

fn fill_bounds(schema: &mut [AttributeSchema], records: &[Vec<Value>]) -> Result<()> {
    for (i, a) in schema.iter_mut().enumerate() {
        match a.kind {
            Kind::Numeric => {}
            _ => {
                if let Some(v) = records.iter().map(|r| &r[i]).find(|v| matches!(v, Value::Number(_))) {
                    return Err(Error::Schema(format!(
                        "`{}` is categorical but holds number {v}",
                        a.name
                    )));
                }
                continue;
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (r, rec) in records.iter().enumerate() {
            match &rec[i] {
                Value::Number(x) => {
                    lo = lo.min(*x);
                    hi = hi.max(*x);
                }
                Value::Text(t) => {
                    return Err(Error::NotNumeric {
                        row: r + 1,
                        column: a.name.clone(),
                        token: t.clone(),
                    })
                }
                Value::Missing | Value::Suppressed => {}
            }
        }
        match a.bounds() {
            Some((dlo, dhi)) => {
                if lo < dlo || hi > dhi {
                    return Err(Error::Schema(format!(
                        "`{}` holds values outside [{dlo}, {dhi}]",
                        a.name
                    )));
                }
            }
            None if lo.is_finite() => {
                a.min = Some(lo);
                a.max = Some(hi);
            }
            None => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn loads_roles_and_counts() {
        let header = s(&["gender", "disease"]);
        let rows = vec![
            s(&["Male", "flu"]),
            s(&["Female", "flu"]),
            s(&["Male", "cancer"]),
            s(&["Female", "gastritis"]),
        ];
        let cfg = vec![
            AttributeSchema::new("gender", Role::QuasiIdentifier, Kind::Categorical),
            AttributeSchema::new("disease", Role::Sensitive, Kind::Categorical),
        ];
        let (d, log) = Dataset::from_rows(&header, &rows, &cfg).unwrap();
        assert_eq!(d.schema().len(), 2);
        assert_eq!(d.len(), 4);
        assert_eq!(log.rows, 4);
        assert!(log.dropped_identifiers.is_empty());
    }

    #[test]
    fn drops_direct_identifiers() {
        let header = s(&["ssn", "age"]);
        let rows = vec![s(&["111", "30"]), s(&["222", "40"])];
        let cfg = vec![
            AttributeSchema::new("ssn", Role::DirectIdentifier, Kind::Categorical),
            AttributeSchema::new("age", Role::QuasiIdentifier, Kind::Numeric),
        ];
        let (d, log) = Dataset::from_rows(&header, &rows, &cfg).unwrap();
        assert_eq!(log.dropped_identifiers, vec!["ssn".to_string()]);
        assert!(d.attribute_index("ssn").is_err());
        assert!(d.records().iter().all(|r| r.len() == 1));
        assert_eq!(d.attribute("age").unwrap().bounds(), Some((30.0, 40.0)));
    }

    #[test]
    fn non_numeric_token_names_row_and_column() {
        let header = s(&["age"]);
        let rows = vec![s(&["31"]), s(&["abc"])];
        let cfg = vec![AttributeSchema::new("age", Role::QuasiIdentifier, Kind::Numeric)];
        let err = Dataset::from_rows(&header, &rows, &cfg).unwrap_err();
        assert_eq!(
            err,
            Error::NotNumeric {
                row: 3,
                column: "age".into(),
                token: "abc".into()
            }
        );
    }

    #[test]
    fn header_mismatch_and_empty() {
        let cfg = vec![AttributeSchema::new("a", Role::QuasiIdentifier, Kind::Categorical)];
        assert!(matches!(
            Dataset::from_rows(&s(&["b"]), &[s(&["x"])], &cfg),
            Err(Error::HeaderMismatch(_))
        ));
        assert!(matches!(
            Dataset::from_rows(&s(&["a", "b"]), &[s(&["x", "y"])], &cfg),
            Err(Error::HeaderMismatch(_))
        ));
        assert_eq!(Dataset::from_rows(&s(&["a"]), &[], &cfg), Err(Error::EmptyTable));
    }

    #[test]
    fn star_is_reserved_and_missing_maps_to_question_mark() {
        let cfg = vec![AttributeSchema::new("a", Role::QuasiIdentifier, Kind::Categorical)];
        assert!(matches!(
            Dataset::from_rows(&s(&["a"]), &[s(&["*"])], &cfg),
            Err(Error::ReservedValue { .. })
        ));
        let (d, log) = Dataset::from_rows(&s(&["a"]), &[s(&[""]), s(&["?"])], &cfg).unwrap();
        assert_eq!(log.missing_cells, 2);
        assert_eq!(d.value(0, 0).label(), "?");
    }

    #[test]
    fn declared_bounds_are_enforced() {
        let cfg = vec![AttributeSchema::new("age", Role::QuasiIdentifier, Kind::Numeric).with_bounds(0.0, 100.0)];
        assert!(matches!(
            Dataset::from_rows(&s(&["age"]), &[s(&["101"])], &cfg),
            Err(Error::OutOfBounds { .. })
        ));
        let bad = vec![AttributeSchema::new("age", Role::QuasiIdentifier, Kind::Numeric).with_bounds(5.0, 5.0)];
        assert!(matches!(
            Dataset::from_rows(&s(&["age"]), &[s(&["5"])], &bad),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn deterministic_ingestion() {
        let header = s(&["a", "b"]);
        let rows = vec![s(&["x", "1.5"]), s(&["y", "2"])];
        let cfg = vec![
            AttributeSchema::new("a", Role::QuasiIdentifier, Kind::Categorical),
            AttributeSchema::new("b", Role::Insensitive, Kind::Numeric),
        ];
        let a = Dataset::from_rows(&header, &rows, &cfg).unwrap();
        let b = Dataset::from_rows(&header, &rows, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.value(1, 1).label(), "2");
        assert_eq!(a.0.value(0, 1).label(), "1.5");
    }
}
