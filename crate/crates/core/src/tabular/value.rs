//! Cell values and attribute metadata.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::TableError;

/// Reserved name standing for "any attribute" in templates.
pub const WILDCARD: &str = "*";

/// Measurement level of an attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeType {
    Nominal,
    Ordinal,
    Quantitative,
    Temporal,
}

impl AttributeType {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeType::Nominal => "nominal",
            AttributeType::Ordinal => "ordinal",
            AttributeType::Quantitative => "quantitative",
            AttributeType::Temporal => "temporal",
        }
    }
}

impl fmt::Display for AttributeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named, typed column of a table.
///
/// Ordinal attributes may carry an explicit category order; without one they
/// compare like nominal attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    #[serde(rename = "type")]
    pub attribute_type: AttributeType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
}

impl Attribute {
    pub fn new(name: impl Into<String>, attribute_type: AttributeType) -> Self {
        Self {
            name: name.into(),
            attribute_type,
            order: None,
        }
    }

    pub fn nominal(name: impl Into<String>) -> Self {
        Self::new(name, AttributeType::Nominal)
    }

    pub fn quantitative(name: impl Into<String>) -> Self {
        Self::new(name, AttributeType::Quantitative)
    }

    pub fn temporal(name: impl Into<String>) -> Self {
        Self::new(name, AttributeType::Temporal)
    }

    pub fn ordinal(name: impl Into<String>, order: Vec<String>) -> Self {
        Self {
            name: name.into(),
            attribute_type: AttributeType::Ordinal,
            order: Some(order),
        }
    }

    /// Category order in effect for comparisons, if any.
    pub fn category_order(&self) -> Option<&[String]> {
        match self.attribute_type {
            AttributeType::Ordinal => self.order.as_deref(),
            _ => None,
        }
    }

    /// Checks that `value` may be stored in a column of this attribute.
    pub fn admits(&self, value: &Value) -> bool {
        match (self.attribute_type, value) {
            (_, Value::Null) => true,
            (AttributeType::Quantitative, Value::Number(n)) => n.is_finite(),
            (AttributeType::Temporal, Value::Date(_)) => true,
            (AttributeType::Nominal | AttributeType::Ordinal, Value::Text(_) | Value::Bool(_)) => true,
            _ => false,
        }
    }
}

/// A single cell.
///
/// Equality, hashing and ordering on `Value` are structural: `Null == Null`
/// and values of different tags order by tag. This is what grouping, joining
/// and label bookkeeping need. Expression semantics (null never equal,
/// cross-tag comparisons rejected) live in [`Value::compare`].
#[derive(Debug, Clone)]
pub enum Value {
    Null,
    Number(f64),
    Text(String),
    Bool(bool),
    Date(NaiveDate),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_date(&self) -> Option<NaiveDate> {
        match self {
            Value::Date(d) => Some(*d),
            _ => None,
        }
    }

    /// Numeric view used by models: numbers as-is, dates as days since the
    /// Unix epoch.
    pub fn numeric(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            Value::Date(d) => Some(days_since_epoch(*d) as f64),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Number(_) => "number",
            Value::Text(_) => "string",
            Value::Bool(_) => "boolean",
            Value::Date(_) => "date",
        }
    }

    fn tag_rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Bool(_) => 1,
            Value::Number(_) => 2,
            Value::Date(_) => 3,
            Value::Text(_) => 4,
        }
    }

    /// Semantic comparison. `Ok(None)` when either side is null; an error
    /// when the tags differ.
    pub fn compare(&self, other: &Value) -> Result<Option<Ordering>, TableError> {
        match (self, other) {
            (Value::Null, _) | (_, Value::Null) => Ok(None),
            (Value::Number(a), Value::Number(b)) => Ok(a.partial_cmp(b)),
            (Value::Text(a), Value::Text(b)) => Ok(Some(a.cmp(b))),
            (Value::Bool(a), Value::Bool(b)) => Ok(Some(a.cmp(b))),
            (Value::Date(a), Value::Date(b)) => Ok(Some(a.cmp(b))),
            (a, b) => Err(TableError::IncomparableValues {
                left: a.tag(),
                right: b.tag(),
            }),
        }
    }

    /// Converts to the JSON representation used by the table format.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Null => serde_json::Value::Null,
            Value::Number(n) => serde_json::Number::from_f64(*n)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Value::Text(s) => serde_json::Value::String(s.clone()),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Date(d) => serde_json::Value::String(d.format("%Y-%m-%d").to_string()),
        }
    }

    /// Parses a JSON cell for a column of the given attribute.
    pub fn from_json(json: &serde_json::Value, attr: &Attribute) -> Result<Value, TableError> {
        use serde_json::Value as J;
        let value = match (attr.attribute_type, json) {
            (_, J::Null) => Value::Null,
            (AttributeType::Quantitative, J::Number(n)) => Value::Number(n.as_f64().unwrap_or(f64::NAN)),
            (AttributeType::Temporal, J::String(s)) => match parse_date(s) {
                Some(d) => Value::Date(d),
                None => {
                    return Err(TableError::InvalidValue {
                        attribute: attr.name.clone(),
                        detail: format!("`{s}` is not a date"),
                    })
                }
            },
            (AttributeType::Nominal | AttributeType::Ordinal, J::String(s)) => Value::Text(s.clone()),
            (AttributeType::Nominal | AttributeType::Ordinal, J::Bool(b)) => Value::Bool(*b),
            (t, other) => {
                return Err(TableError::InvalidValue {
                    attribute: attr.name.clone(),
                    detail: format!("JSON `{other}` is not a {t} value"),
                })
            }
        };
        if !attr.admits(&value) {
            return Err(TableError::InvalidValue {
                attribute: attr.name.clone(),
                detail: "non-finite number".into(),
            });
        }
        Ok(value)
    }

    /// Parses a raw CSV cell. Empty cells are null; quantitative and temporal
    /// cells that fail to parse become null.
    pub fn parse_cell(raw: &str, attribute_type: AttributeType) -> Value {
        if raw.is_empty() {
            return Value::Null;
        }
        match attribute_type {
            AttributeType::Quantitative => parse_number(raw).map_or(Value::Null, Value::Number),
            AttributeType::Temporal => parse_date(raw).map_or(Value::Null, Value::Date),
            AttributeType::Nominal | AttributeType::Ordinal => Value::Text(raw.to_string()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Number(n) => write!(f, "{n}"),
            Value::Text(s) => f.write_str(s),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::Number(n)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<NaiveDate> for Value {
    fn from(d: NaiveDate) -> Self {
        Value::Date(d)
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => normalize(*a).total_cmp(&normalize(*b)),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Date(a), Value::Date(b)) => a.cmp(b),
            (a, b) => a.tag_rank().cmp(&b.tag_rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.tag_rank().hash(state);
        match self {
            Value::Null => {}
            Value::Number(n) => normalize(*n).to_bits().hash(state),
            Value::Text(s) => s.hash(state),
            Value::Bool(b) => b.hash(state),
            Value::Date(d) => d.hash(state),
        }
    }
}

fn normalize(n: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        n
    }
}

/// Parses a finite decimal number. `NaN`/`inf` spellings are rejected.
pub fn parse_number(raw: &str) -> Option<f64> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || !trimmed.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    trimmed.parse::<f64>().ok().filter(|n| n.is_finite())
}

/// Parses `YYYY-MM-DD` or US `MM/DD/YYYY`.
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let trimmed = raw.trim();
    NaiveDate::parse_from_str(trimmed, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(trimmed, "%m/%d/%Y"))
        .ok()
        .filter(|d| {
            // chrono accepts 1- and 5-digit years; require four.
            (0..=9999).contains(&d.year()) && (trimmed.len() == 10 || trimmed.matches('/').count() == 2)
        })
}

pub(crate) fn days_since_epoch(d: NaiveDate) -> i64 {
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch");
    (d - epoch).num_days()
}
