//! Immutable typed tables, CSV/JSON ingestion and schema inference.
//!
//! A [`Table`] stores rows positionally against its schema, so every row
//! always carries exactly one value per attribute. Tables never change after
//! construction; transforms build new ones.

mod csv_io;
mod value;

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{infer_schema, load_csv, read_csv, write_csv, write_csv_string};
pub use value::{parse_date, parse_number, Attribute, AttributeType, Value, WILDCARD};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),
    #[error("invalid attribute name `{0}`")]
    InvalidAttributeName(String),
    #[error("header does not match schema (missing from header: {missing:?}; not in schema: {unexpected:?})")]
    SchemaMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("invalid value for `{attribute}`: {detail}")]
    InvalidValue { attribute: String, detail: String },
    #[error("cannot compare {left} with {right}")]
    IncomparableValues { left: &'static str, right: &'static str },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("empty header")]
    EmptyHeader,
}

/// A record view: attribute name to value.
pub type Record = BTreeMap<String, Value>;

/// An immutable in-memory relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    name: String,
    schema: Arc<[Attribute]>,
    rows: Arc<[Vec<Value>]>,
}

impl Table {
    /// Builds a table, checking arity, name uniqueness and value types.
    pub fn new(name: impl Into<String>, schema: Vec<Attribute>, rows: Vec<Vec<Value>>) -> Result<Self, TableError> {
        check_schema(&schema)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(TableError::RaggedRow {
                    row: i,
                    found: row.len(),
                    expected: schema.len(),
                });
            }
            for (attr, value) in schema.iter().zip(row) {
                if !attr.admits(value) {
                    return Err(TableError::InvalidValue {
                        attribute: attr.name.clone(),
                        detail: format!("row {i}: {} value in {} column", value.tag(), attr.attribute_type),
                    });
                }
            }
        }
        Ok(Self {
            name: name.into(),
            schema: schema.into(),
            rows: rows.into(),
        })
    }

    /// Builds a table from name-keyed records. Missing keys are null; extra
    /// keys are rejected.
    pub fn from_records(
        name: impl Into<String>,
        schema: Vec<Attribute>,
        records: &[Record],
    ) -> Result<Self, TableError> {
        let known: HashSet<&str> = schema.iter().map(|a| a.name.as_str()).collect();
        let mut rows = Vec::with_capacity(records.len());
        for record in records {
            if let Some(extra) = record.keys().find(|k| !known.contains(k.as_str())) {
                return Err(TableError::UnknownAttribute(extra.clone()));
            }
            rows.push(
                schema
                    .iter()
                    .map(|a| record.get(&a.name).cloned().unwrap_or(Value::Null))
                    .collect(),
            );
        }
        Self::new(name, schema, rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            schema: Arc::clone(&self.schema),
            rows: Arc::clone(&self.rows),
        }
    }

    pub fn schema(&self) -> &[Attribute] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.schema.len()
    }

    /// Number of data values: rows × columns.
    pub fn cell_count(&self) -> usize {
        self.row_count() * self.column_count()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|a| a.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.schema.iter().find(|a| a.name == name)
    }

    pub fn column(&self, name: &str) -> Option<impl Iterator<Item = &Value> + '_> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(move |r| &r[idx]))
    }

    pub fn value(&self, row: usize, name: &str) -> Option<&Value> {
        let idx = self.column_index(name)?;
        self.rows.get(row).map(|r| &r[idx])
    }

    pub fn record(&self, row: usize) -> Option<Record> {
        self.rows.get(row).map(|r| {
            self.schema
                .iter()
                .zip(r)
                .map(|(a, v)| (a.name.clone(), v.clone()))
                .collect()
        })
    }

    pub fn records(&self) -> impl Iterator<Item = Record> + '_ {
        (0..self.row_count()).filter_map(|i| self.record(i))
    }

    /// Serializes to the JSON table format.
    pub fn to_json(&self) -> serde_json::Value {
        let doc = TableDocument {
            name: self.name.clone(),
            schema: self.schema.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|row| {
                    self.schema
                        .iter()
                        .zip(row)
                        .map(|(a, v)| (a.name.clone(), v.to_json()))
                        .collect()
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("table document serializes")
    }

    /// Parses the JSON table format.
    pub fn from_json(json: &serde_json::Value) -> Result<Self, TableError> {
        let doc: TableDocument = serde_json::from_value(json.clone())?;
        doc.into_table()
    }
}

/// Serialized table: `{ name, schema: [{name, type}], rows: [{attr: value}] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableDocument {
    pub name: String,
    pub schema: Vec<Attribute>,
    #[serde(default)]
    pub rows: Vec<serde_json::Map<String, serde_json::Value>>,
}

impl TableDocument {
    pub fn into_table(self) -> Result<Table, TableError> {
        check_schema(&self.schema)?;
        let mut rows = Vec::with_capacity(self.rows.len());
        for record in &self.rows {
            if let Some(extra) = record.keys().find(|k| !self.schema.iter().any(|a| &a.name == *k)) {
                return Err(TableError::UnknownAttribute(extra.clone()));
            }
            let row = self
                .schema
                .iter()
                .map(|a| match record.get(&a.name) {
                    Some(j) => Value::from_json(j, a),
                    None => Ok(Value::Null),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Table::new(self.name, self.schema, rows)
    }
}

pub(crate) fn check_schema(schema: &[Attribute]) -> Result<(), TableError> {
    let mut seen = HashSet::new();
    for attr in schema {
        if attr.name.is_empty() || attr.name == WILDCARD {
            return Err(TableError::InvalidAttributeName(attr.name.clone()));
        }
        if !seen.insert(attr.name.as_str()) {
            return Err(TableError::DuplicateAttribute(attr.name.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        Table::new(
            "t",
            vec![Attribute::quantitative("x"), Attribute::nominal("y")],
            vec![
                vec![Value::Number(1.0), Value::text("a")],
                vec![Value::Null, Value::text("b")],
            ],
        )
        .unwrap()
    }

    #[test]
    fn cell_count_is_rows_times_columns() {
        assert_eq!(sample().cell_count(), 4);
        let empty = Table::new("e", vec![Attribute::nominal("a"); 1], vec![]).unwrap();
        assert_eq!(empty.cell_count(), 0);
        let ten_by_four = Table::new(
            "w",
            (0..4).map(|i| Attribute::quantitative(format!("c{i}"))).collect(),
            vec![vec![Value::Number(0.0); 4]; 10],
        )
        .unwrap();
        assert_eq!(ten_by_four.cell_count(), 40);
    }

    #[test]
    fn rejects_type_violations() {
        let err = Table::new("t", vec![Attribute::quantitative("x")], vec![vec![Value::text("oops")]]).unwrap_err();
        assert!(matches!(err, TableError::InvalidValue { .. }));
        let err = Table::new(
            "t",
            vec![Attribute::quantitative("x")],
            vec![vec![Value::Number(f64::NAN)]],
        )
        .unwrap_err();
        assert!(matches!(err, TableError::InvalidValue { .. }));
    }

    #[test]
    fn rejects_duplicate_and_reserved_names() {
        let dup = vec![Attribute::nominal("a"), Attribute::nominal("a")];
        assert!(matches!(
            Table::new("t", dup, vec![]),
            Err(TableError::DuplicateAttribute(_))
        ));
        assert!(matches!(
            Table::new("t", vec![Attribute::nominal("*")], vec![]),
            Err(TableError::InvalidAttributeName(_))
        ));
        // case-sensitive uniqueness
        assert!(Table::new("t", vec![Attribute::nominal("a"), Attribute::nominal("A")], vec![]).is_ok());
    }

    #[test]
    fn ragged_rows_report_index() {
        let err = Table::new("t", vec![Attribute::nominal("a")], vec![vec![Value::text("x")], vec![]]).unwrap_err();
        assert!(matches!(err, TableError::RaggedRow { row: 1, .. }));
    }

    #[test]
    fn json_round_trip() {
        let t = sample();
        let back = Table::from_json(&t.to_json()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn records_fill_missing_with_null_and_reject_extras() {
        let mut r = Record::new();
        r.insert("x".into(), Value::Number(2.0));
        let t = Table::from_records(
            "t",
            vec![Attribute::quantitative("x"), Attribute::nominal("y")],
            &[r.clone()],
        )
        .unwrap();
        assert_eq!(t.value(0, "y"), Some(&Value::Null));
        r.insert("z".into(), Value::Null);
        assert!(Table::from_records("t", vec![Attribute::quantitative("x")], &[r]).is_err());
    }
}
