//! Nested-loop relational operators over plain rows, and random tables.

use std::cmp::Ordering;

use insightkit::tabular::{Attribute, AttributeType, Table, Value};
use rand::Rng;

/// Column names plus rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Rel {
    pub names: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Rel {
    pub fn of(table: &Table) -> Self {
        Self {
            names: table.schema().iter().map(|a| a.name.clone()).collect(),
            rows: table.rows().to_vec(),
        }
    }

    pub fn col(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }
}

const CATEGORIES: [&str; 4] = ["a", "b", "c", "d"];

/// A table of up to `max_rows` rows and 1..=`max_cols` columns named
/// `{prefix}0`, `{prefix}1`, ...; numbers are small integers and about one
/// cell in eight is null, so groups and ties are common.
/// `first`, when given, fixes the type of column 0.
pub fn random_table(
    rng: &mut impl Rng,
    name: &str,
    prefix: &str,
    max_rows: usize,
    max_cols: usize,
    first: Option<AttributeType>,
) -> Table {
    let cols = rng.random_range(1..=max_cols);
    let rows = rng.random_range(0..=max_rows);
    let schema: Vec<Attribute> = (0..cols)
        .map(|i| {
            let name = format!("{prefix}{i}");
            let quantitative = match (i, first) {
                (0, Some(t)) => t == AttributeType::Quantitative,
                _ => rng.random_bool(0.5),
            };
            if quantitative {
                Attribute::quantitative(name)
            } else {
                Attribute::nominal(name)
            }
        })
        .collect();
    let data = (0..rows)
        .map(|_| schema.iter().map(|a| random_cell(rng, a.attribute_type)).collect())
        .collect();
    Table::new(name, schema, data).expect("generated cells fit their columns")
}

pub fn random_cell(rng: &mut impl Rng, ty: AttributeType) -> Value {
    if rng.random_bool(0.125) {
        return Value::Null;
    }
    match ty {
        AttributeType::Quantitative => Value::Number(rng.random_range(-3..=6) as f64),
        _ => Value::text(CATEGORIES[rng.random_range(0..CATEGORIES.len())]),
    }
}

/// Order on non-null cells of one column.
fn cmp_cells(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.partial_cmp(y).expect("finite numbers"),
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        _ => panic!("uncomparable cells {a:?} and {b:?}"),
    }
}

fn same(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Null, Value::Null) => true,
        (Value::Null, _) | (_, Value::Null) => false,
        _ => cmp_cells(a, b) == Ordering::Equal,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Agg {
    Count,
    Sum,
    Mean,
    Min,
    Max,
}

impl Agg {
    pub fn expr(self, column: &str) -> String {
        match self {
            Agg::Count => "count()".into(),
            Agg::Sum => format!("sum({column})"),
            Agg::Mean => format!("mean({column})"),
            Agg::Min => format!("min({column})"),
            Agg::Max => format!("max({column})"),
        }
    }
}

/// Groups by `keys` (all rows form one group when empty), one output row
/// per group in order of first appearance: key values then aggregates.
pub fn group_rollup(rel: &Rel, keys: &[&str], aggs: &[(&str, Agg, Option<&str>)]) -> Rel {
    let key_idx: Vec<usize> = keys.iter().map(|k| rel.col(k)).collect();
    let mut groups: Vec<(Vec<Value>, Vec<usize>)> = Vec::new();
    if keys.is_empty() {
        groups.push((vec![], (0..rel.rows.len()).collect()));
    } else {
        for (i, row) in rel.rows.iter().enumerate() {
            let key: Vec<Value> = key_idx.iter().map(|&k| row[k].clone()).collect();
            match groups
                .iter_mut()
                .find(|(g, _)| g.iter().zip(&key).all(|(a, b)| same(a, b)))
            {
                Some((_, members)) => members.push(i),
                None => groups.push((key, vec![i])),
            }
        }
    }
    let rows = groups
        .into_iter()
        .map(|(mut key, members)| {
            for (_, agg, col) in aggs {
                let values: Vec<&Value> = match col {
                    Some(c) => {
                        let c = rel.col(c);
                        members
                            .iter()
                            .map(|&i| &rel.rows[i][c])
                            .filter(|v| !v.is_null())
                            .collect()
                    }
                    None => vec![],
                };
                let out = match agg {
                    Agg::Count => Value::Number(members.len() as f64),
                    _ if values.is_empty() => Value::Null,
                    Agg::Sum | Agg::Mean => {
                        let mut total = 0.0;
                        for v in &values {
                            total += v.as_f64().expect("numeric column");
                        }
                        if *agg == Agg::Sum {
                            Value::Number(total)
                        } else {
                            Value::Number(total / values.len() as f64)
                        }
                    }
                    Agg::Min | Agg::Max => {
                        let mut best = values[0];
                        for v in &values[1..] {
                            let o = cmp_cells(v, best);
                            if (*agg == Agg::Min && o == Ordering::Less) || (*agg == Agg::Max && o == Ordering::Greater)
                            {
                                best = v;
                            }
                        }
                        best.clone()
                    }
                };
                key.push(out);
            }
            key
        })
        .collect();
    let mut names: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
    names.extend(aggs.iter().map(|(n, _, _)| n.to_string()));
    Rel { names, rows }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn holds(self, o: Ordering) -> bool {
        match self {
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Ne => o != Ordering::Equal,
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
        }
    }
}

/// Filter predicates with SQL-style three-valued logic.
#[derive(Debug, Clone)]
pub enum Pred {
    Cmp(String, CmpOp, Value),
    IsValid(String),
    Not(Box<Pred>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
}

impl Pred {
    /// Expression text accepted by the engine's parser.
    pub fn text(&self) -> String {
        match self {
            Pred::Cmp(c, op, v) => {
                let lit = match v {
                    Value::Number(n) => format!("{n}"),
                    Value::Text(s) => format!("\"{s}\""),
                    other => panic!("unsupported literal {other:?}"),
                };
                format!("{c} {} {lit}", op.symbol())
            }
            Pred::IsValid(c) => format!("isValid({c})"),
            Pred::Not(p) => format!("!({})", p.text()),
            Pred::And(a, b) => format!("({}) && ({})", a.text(), b.text()),
            Pred::Or(a, b) => format!("({}) || ({})", a.text(), b.text()),
        }
    }

    /// `Some(truth)` or `None` for unknown.
    pub fn eval(&self, rel: &Rel, row: &[Value]) -> Option<bool> {
        match self {
            Pred::Cmp(c, op, v) => {
                let cell = &row[rel.col(c)];
                if cell.is_null() {
                    None
                } else {
                    Some(op.holds(cmp_cells(cell, v)))
                }
            }
            Pred::IsValid(c) => Some(!row[rel.col(c)].is_null()),
            Pred::Not(p) => p.eval(rel, row).map(|b| !b),
            Pred::And(a, b) => match (a.eval(rel, row), b.eval(rel, row)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Pred::Or(a, b) => match (a.eval(rel, row), b.eval(rel, row)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
        }
    }
}

/// A random predicate over the columns of `table`, up to `depth` levels of
/// connectives deep.
pub fn random_predicate(rng: &mut impl Rng, table: &Table, depth: usize) -> Pred {
    if depth == 0 || rng.random_bool(0.4) {
        return random_leaf(rng, table);
    }
    match rng.random_range(0..3) {
        0 => Pred::Not(Box::new(random_predicate(rng, table, depth - 1))),
        1 => Pred::And(
            Box::new(random_predicate(rng, table, depth - 1)),
            Box::new(random_predicate(rng, table, depth - 1)),
        ),
        _ => Pred::Or(
            Box::new(random_predicate(rng, table, depth - 1)),
            Box::new(random_predicate(rng, table, depth - 1)),
        ),
    }
}

fn random_leaf(rng: &mut impl Rng, table: &Table) -> Pred {
    let attr = &table.schema()[rng.random_range(0..table.schema().len())];
    if rng.random_bool(0.15) {
        return Pred::IsValid(attr.name.clone());
    }
    let op = CmpOp::ALL[rng.random_range(0..CmpOp::ALL.len())];
    let lit = loop {
        let v = random_cell(rng, attr.attribute_type);
        if !v.is_null() {
            break v;
        }
    };
    Pred::Cmp(attr.name.clone(), op, lit)
}

/// Rows for which the predicate is true.
pub fn filter(rel: &Rel, pred: &Pred) -> Rel {
    Rel {
        names: rel.names.clone(),
        rows: rel
            .rows
            .iter()
            .filter(|r| pred.eval(rel, r) == Some(true))
            .cloned()
            .collect(),
    }
}

/// Stable insertion sort on `(column, descending)` keys. Nulls sort after
/// every value ascending and before every value descending.
pub fn order_by(rel: &Rel, keys: &[(&str, bool)]) -> Rel {
    let idx: Vec<(usize, bool)> = keys.iter().map(|(k, d)| (rel.col(k), *d)).collect();
    let before = |a: &[Value], b: &[Value]| {
        for &(c, desc) in &idx {
            let o = match (a[c].is_null(), b[c].is_null()) {
                (true, true) => Ordering::Equal,
                (true, false) => Ordering::Greater,
                (false, true) => Ordering::Less,
                (false, false) => cmp_cells(&a[c], &b[c]),
            };
            let o = if desc { o.reverse() } else { o };
            if o != Ordering::Equal {
                return o == Ordering::Less;
            }
        }
        false
    };
    let mut out: Vec<Vec<Value>> = Vec::with_capacity(rel.rows.len());
    for row in &rel.rows {
        let mut at = out.len();
        while at > 0 && before(row, &out[at - 1]) {
            at -= 1;
        }
        out.insert(at, row.clone());
    }
    Rel {
        names: rel.names.clone(),
        rows: out,
    }
}

/// Inner equi-join: for each left row, every matching right row in right
/// order. Null keys never match. Right column names that collide get `_r`
/// appended until unique.
pub fn inner_join(left: &Rel, right: &Rel, on: &[(&str, &str)]) -> Rel {
    let pairs: Vec<(usize, usize)> = on.iter().map(|(l, r)| (left.col(l), right.col(r))).collect();
    let mut names = left.names.clone();
    for n in &right.names {
        let mut name = n.clone();
        while names.contains(&name) {
            name.push_str("_r");
        }
        names.push(name);
    }
    let mut rows = Vec::new();
    for l in &left.rows {
        for r in &right.rows {
            if pairs
                .iter()
                .all(|&(a, b)| !l[a].is_null() && !r[b].is_null() && same(&l[a], &r[b]))
            {
                let mut joined = l.clone();
                joined.extend(r.iter().cloned());
                rows.push(joined);
            }
        }
    }
    Rel { names, rows }
}
