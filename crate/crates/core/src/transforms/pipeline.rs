//! Binding and execution of transform pipelines.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use indexmap::IndexMap;

use super::bind::{ordinal_key, BindOptions, BoundExpr, ColumnInfo, EvalContext, ExprType};
use super::expr::{AggregateExpr, AttrRef};
use super::{BinSpec, Direction, TransformError, TransformSpec, TransformStep};
use crate::tabular::{Attribute, AttributeType, Table, Value, WILDCARD};

static NEXT_DATASETS_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_DATASETS_ID.fetch_add(1, AtomicOrdering::Relaxed)
}

/// Named tables available to pipelines and models.
///
/// Each distinct set of contents carries its own identity, which result
/// memoization keys on; any insertion yields a new identity.
#[derive(Debug)]
pub struct Datasets {
    id: u64,
    tables: BTreeMap<String, Arc<Table>>,
}

impl Default for Datasets {
    fn default() -> Self {
        Self::new()
    }
}

impl Clone for Datasets {
    fn clone(&self) -> Self {
        Self {
            id: self.id,
            tables: self.tables.clone(),
        }
    }
}

impl Datasets {
    pub fn new() -> Self {
        Self {
            id: fresh_id(),
            tables: BTreeMap::new(),
        }
    }

    /// Registers `table` under its own name.
    pub fn insert(&mut self, table: Table) {
        let name = table.name().to_string();
        self.insert_as(name, table);
    }

    pub fn insert_as(&mut self, name: impl Into<String>, table: Table) {
        let name = name.into();
        let table = if table.name() == name {
            table
        } else {
            table.with_name(name.clone())
        };
        self.tables.insert(name, Arc::new(table));
        self.id = fresh_id();
    }

    pub fn with(mut self, table: Table) -> Self {
        self.insert(table);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Table> {
        self.tables.get(name).map(Arc::as_ref)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

impl FromIterator<Table> for Datasets {
    fn from_iter<I: IntoIterator<Item = Table>>(iter: I) -> Self {
        let mut ds = Datasets::new();
        for t in iter {
            ds.insert(t);
        }
        ds
    }
}

#[derive(Debug, Clone)]
struct ScopeColumn {
    info: ColumnInfo,
    origin: Option<(String, String)>,
}

#[derive(Debug, Clone)]
struct BoundSort {
    col: usize,
    desc: bool,
    order: Option<Arc<[String]>>,
}

#[derive(Debug, Clone)]
struct BoundAggregate {
    expr: AggregateExpr,
    col: Option<usize>,
    order: Option<Arc<[String]>>,
}

#[derive(Debug, Clone)]
enum BoundStep {
    Aggregate {
        keys: Vec<usize>,
        aggregates: Vec<BoundAggregate>,
    },
    OrderBy(Vec<BoundSort>),
    Filter(BoundExpr),
    Derive {
        target: Option<usize>,
        expr: BoundExpr,
    },
    Bin {
        col: usize,
        bins: BinSpec,
    },
    Join {
        right: String,
        left_keys: Vec<usize>,
        right_keys: Vec<usize>,
    },
}

/// A type-checked pipeline, ready to run.
#[derive(Debug, Clone)]
pub struct BoundPipeline {
    source: String,
    steps: Vec<BoundStep>,
    output: Vec<Attribute>,
    referenced: BTreeSet<(String, String)>,
}

impl BoundPipeline {
    pub fn output_schema(&self) -> &[Attribute] {
        &self.output
    }

    /// Source attributes the pipeline reads, as `(source, attribute)` pairs.
    pub fn referenced_attributes(&self) -> &BTreeSet<(String, String)> {
        &self.referenced
    }

    pub fn execute(&self, datasets: &Datasets) -> Result<Table, TransformError> {
        let input = datasets
            .get(&self.source)
            .ok_or_else(|| TransformError::UnresolvedSource(self.source.clone()))?;
        let mut rows: Vec<Vec<Value>> = input.rows().to_vec();
        for step in &self.steps {
            rows = run_step(step, rows, datasets)?;
        }
        Ok(Table::new(self.source.clone(), self.output.clone(), rows)?)
    }
}

struct Binder<'a> {
    datasets: &'a Datasets,
    sources: &'a [String],
    scope: Vec<ScopeColumn>,
    referenced: BTreeSet<(String, String)>,
}

impl Binder<'_> {
    fn resolve(&mut self, attr: &AttrRef) -> Result<usize, TransformError> {
        let name = attr
            .as_name()
            .ok_or_else(|| TransformError::WildcardPresent("attribute reference".into()))?;
        let idx = self
            .scope
            .iter()
            .position(|c| c.info.attribute.name == name)
            .ok_or_else(|| TransformError::UnknownAttribute {
                attribute: name.to_string(),
                step: None,
            })?;
        self.touch(idx);
        Ok(idx)
    }

    fn touch(&mut self, idx: usize) {
        if let Some(origin) = &self.scope[idx].origin {
            self.referenced.insert(origin.clone());
        }
    }

    fn columns(&self) -> Vec<ColumnInfo> {
        self.scope.iter().map(|c| c.info.clone()).collect()
    }

    fn bind_expr(&mut self, expr: &super::Expr, options: BindOptions) -> Result<BoundExpr, TransformError> {
        let bound = BoundExpr::bind(expr, &self.columns(), options)?;
        for col in expr.columns() {
            if let Some(name) = col.as_name() {
                if let Some(idx) = self.scope.iter().position(|c| c.info.attribute.name == name) {
                    self.touch(idx);
                }
            }
        }
        Ok(bound)
    }

    fn check_new_name(&self, name: &str, replacing: bool) -> Result<(), TransformError> {
        if name.is_empty() || name == WILDCARD {
            return Err(TransformError::InvalidPipeline {
                step: None,
                detail: format!("invalid output name `{name}`"),
            });
        }
        if !replacing && self.scope.iter().any(|c| c.info.attribute.name == name) {
            return Err(TransformError::InvalidPipeline {
                step: None,
                detail: format!("output name `{name}` collides with an existing column"),
            });
        }
        Ok(())
    }

    fn table(&self, name: &str) -> Result<&Table, TransformError> {
        if !self.sources.iter().any(|s| s == name) {
            return Err(TransformError::InvalidPipeline {
                step: None,
                detail: format!("`{name}` is not listed in the spec's sources"),
            });
        }
        self.datasets
            .get(name)
            .ok_or_else(|| TransformError::UnresolvedSource(name.to_string()))
    }
}

/// Type-checks `spec` against the schemas in `datasets`.
pub fn bind_pipeline(spec: &TransformSpec, datasets: &Datasets) -> Result<BoundPipeline, TransformError> {
    if spec.has_wildcard() {
        return Err(TransformError::WildcardPresent("transform spec".into()));
    }
    let source = spec
        .sources
        .first()
        .ok_or_else(|| TransformError::InvalidSpec("a transform spec needs at least one source".into()))?;
    for s in &spec.sources {
        if datasets.get(s).is_none() {
            return Err(TransformError::UnresolvedSource(s.clone()));
        }
    }
    let input = datasets.get(source).expect("checked above");
    let mut binder = Binder {
        datasets,
        sources: &spec.sources,
        scope: input
            .schema()
            .iter()
            .map(|a| ScopeColumn {
                info: ColumnInfo::from_attribute(a.clone()),
                origin: Some((source.clone(), a.name.clone())),
            })
            .collect(),
        referenced: BTreeSet::new(),
    };

    let mut steps = Vec::new();
    let mut pending_group: Option<Vec<usize>> = None;
    let mut ordered = false;
    for (i, step) in spec.transforms.iter().enumerate() {
        if pending_group.is_some() && !matches!(step, TransformStep::Rollup { .. }) {
            return Err(TransformError::InvalidPipeline {
                step: Some(i),
                detail: "groupby must be immediately followed by rollup".into(),
            });
        }
        let bound = bind_step(&mut binder, step, i, &mut pending_group, &mut ordered).map_err(|e| e.at_step(i))?;
        steps.extend(bound);
    }
    if pending_group.is_some() {
        return Err(TransformError::InvalidPipeline {
            step: Some(spec.transforms.len() - 1),
            detail: "groupby must be immediately followed by rollup".into(),
        });
    }
    Ok(BoundPipeline {
        source: source.clone(),
        steps,
        output: binder.scope.iter().map(|c| c.info.attribute.clone()).collect(),
        referenced: binder.referenced,
    })
}

fn bind_step(
    b: &mut Binder<'_>,
    step: &TransformStep,
    index: usize,
    pending_group: &mut Option<Vec<usize>>,
    ordered: &mut bool,
) -> Result<Option<BoundStep>, TransformError> {
    match step {
        TransformStep::Wildcard => Err(TransformError::WildcardPresent("transform step".into())),
        TransformStep::GroupBy { keys } => {
            let idx = keys.iter().map(|k| b.resolve(k)).collect::<Result<Vec<_>, _>>()?;
            *pending_group = Some(idx);
            Ok(None)
        }
        TransformStep::Rollup { aggregates } => {
            let keys = match pending_group.take() {
                Some(keys) => keys,
                None if index == 0 => Vec::new(),
                None => {
                    return Err(TransformError::AggregateMisuse {
                        step: None,
                        detail: "rollup must follow groupby or be the first step".into(),
                    })
                }
            };
            let mut scope: Vec<ScopeColumn> = keys.iter().map(|&k| b.scope[k].clone()).collect();
            let mut bound = Vec::new();
            for agg in aggregates {
                if agg.name.is_empty()
                    || agg.name == WILDCARD
                    || scope.iter().any(|c| c.info.attribute.name == agg.name)
                {
                    return Err(TransformError::AggregateMisuse {
                        step: None,
                        detail: format!("duplicate or invalid aggregate name `{}`", agg.name),
                    });
                }
                let (col, out_attr) = match agg.expr.attribute() {
                    None => (None, Attribute::quantitative(agg.name.clone())),
                    Some(a) => {
                        let col = b.resolve(a)?;
                        let attr = &b.scope[col].info.attribute;
                        let ty = b.scope[col].info.ty;
                        let out = match agg.expr {
                            AggregateExpr::Sum(_) | AggregateExpr::Mean(_) => {
                                if ty != ExprType::Number {
                                    return Err(TransformError::AggregateMisuse {
                                        step: None,
                                        detail: format!(
                                            "{} needs a quantitative attribute, `{}` is {}",
                                            agg.expr, attr.name, attr.attribute_type
                                        ),
                                    });
                                }
                                Attribute::quantitative(agg.name.clone())
                            }
                            _ => {
                                let orderable = matches!(ty, ExprType::Number | ExprType::Date)
                                    || attr.attribute_type == AttributeType::Ordinal;
                                if !orderable {
                                    return Err(TransformError::AggregateMisuse {
                                        step: None,
                                        detail: format!(
                                            "{} needs a quantitative, ordinal or temporal attribute, `{}` is {}",
                                            agg.expr, attr.name, attr.attribute_type
                                        ),
                                    });
                                }
                                Attribute {
                                    name: agg.name.clone(),
                                    ..attr.clone()
                                }
                            }
                        };
                        (Some(col), out)
                    }
                };
                let order = col.and_then(|c| b.scope[c].info.attribute.category_order().map(Arc::from));
                bound.push(BoundAggregate {
                    expr: agg.expr.clone(),
                    col,
                    order,
                });
                scope.push(ScopeColumn {
                    info: ColumnInfo::from_attribute(out_attr),
                    origin: None,
                });
            }
            b.scope = scope;
            *ordered = false;
            Ok(Some(BoundStep::Aggregate {
                keys,
                aggregates: bound,
            }))
        }
        TransformStep::OrderBy { keys } => {
            if keys.is_empty() {
                return Err(TransformError::InvalidPipeline {
                    step: None,
                    detail: "orderby needs at least one key".into(),
                });
            }
            let sorts = keys
                .iter()
                .map(|k| {
                    let col = b.resolve(&k.attribute)?;
                    Ok(BoundSort {
                        col,
                        desc: k.direction == Direction::Desc,
                        order: b.scope[col].info.attribute.category_order().map(Arc::from),
                    })
                })
                .collect::<Result<Vec<_>, TransformError>>()?;
            *ordered = true;
            Ok(Some(BoundStep::OrderBy(sorts)))
        }
        TransformStep::Filter { predicate } => {
            let bound = b.bind_expr(predicate, BindOptions { allow_rank: *ordered })?;
            if !matches!(bound.ty(), ExprType::Bool | ExprType::Null) {
                return Err(TransformError::TypeMismatch {
                    step: None,
                    detail: "filter predicate must be boolean".into(),
                });
            }
            Ok(Some(BoundStep::Filter(bound)))
        }
        TransformStep::Derive { name, expr } => {
            let target = b.scope.iter().position(|c| c.info.attribute.name == *name);
            b.check_new_name(name, true)?;
            let bound = b.bind_expr(expr, BindOptions::default())?;
            let ty = match bound.ty() {
                ExprType::Null => ExprType::Text,
                t => t,
            };
            let column = ScopeColumn {
                info: ColumnInfo {
                    attribute: Attribute::new(name.clone(), ty.attribute_type()),
                    ty,
                },
                origin: None,
            };
            match target {
                Some(i) => b.scope[i] = column,
                None => b.scope.push(column),
            }
            Ok(Some(BoundStep::Derive { target, expr: bound }))
        }
        TransformStep::Bin { attribute, bins, name } => {
            let col = b.resolve(attribute)?;
            if b.scope[col].info.ty != ExprType::Number {
                return Err(TransformError::TypeMismatch {
                    step: None,
                    detail: format!("bin needs a quantitative attribute, `{attribute}` is not"),
                });
            }
            match *bins {
                BinSpec::Count(0) => {
                    return Err(TransformError::InvalidPipeline {
                        step: None,
                        detail: "bin count must be at least 1".into(),
                    })
                }
                BinSpec::Step(w) if !(w.is_finite() && w > 0.0) => {
                    return Err(TransformError::InvalidPipeline {
                        step: None,
                        detail: "bin step must be a positive number".into(),
                    })
                }
                _ => {}
            }
            for suffix in ["_start", "_end"] {
                let out = format!("{name}{suffix}");
                b.check_new_name(&out, false)?;
                b.scope.push(ScopeColumn {
                    info: ColumnInfo::from_attribute(Attribute::quantitative(out)),
                    origin: None,
                });
            }
            Ok(Some(BoundStep::Bin { col, bins: *bins }))
        }
        TransformStep::Join { right, on } => {
            if on.is_empty() {
                return Err(TransformError::InvalidPipeline {
                    step: None,
                    detail: "join needs at least one key pair".into(),
                });
            }
            let right_table = b.table(right)?.clone();
            let right_cols: Vec<ColumnInfo> = right_table
                .schema()
                .iter()
                .cloned()
                .map(ColumnInfo::from_attribute)
                .collect();
            let mut left_keys = Vec::new();
            let mut right_keys = Vec::new();
            for key in on {
                let l = b.resolve(&key.left)?;
                let rname = key
                    .right
                    .as_name()
                    .ok_or_else(|| TransformError::WildcardPresent("join key".into()))?;
                let r = right_table
                    .column_index(rname)
                    .ok_or_else(|| TransformError::UnknownAttribute {
                        attribute: format!("{right}.{rname}"),
                        step: None,
                    })?;
                let (lt, rt) = (b.scope[l].info.ty, right_cols[r].ty);
                if lt != rt {
                    return Err(TransformError::TypeMismatch {
                        step: None,
                        detail: format!("join key `{}` and `{right}.{rname}` have different types", key.left),
                    });
                }
                b.referenced.insert((right.clone(), rname.to_string()));
                left_keys.push(l);
                right_keys.push(r);
            }
            for col in right_cols {
                let mut name = col.attribute.name.clone();
                while b.scope.iter().any(|c| c.info.attribute.name == name) {
                    name.push_str("_r");
                }
                let origin = Some((right.clone(), col.attribute.name.clone()));
                b.scope.push(ScopeColumn {
                    info: ColumnInfo {
                        attribute: Attribute { name, ..col.attribute },
                        ty: col.ty,
                    },
                    origin,
                });
            }
            *ordered = false;
            Ok(Some(BoundStep::Join {
                right: right.clone(),
                left_keys,
                right_keys,
            }))
        }
    }
}

fn compare_cells(a: &Value, b: &Value, order: Option<&[String]>) -> Ordering {
    match (a.is_null(), b.is_null()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => match order {
            Some(order) => ordinal_key(a, order).cmp(&ordinal_key(b, order)),
            None => a.cmp(b),
        },
    }
}

fn run_step(step: &BoundStep, rows: Vec<Vec<Value>>, datasets: &Datasets) -> Result<Vec<Vec<Value>>, TransformError> {
    Ok(match step {
        BoundStep::Aggregate { keys, aggregates } => {
            let mut groups: IndexMap<Vec<Value>, Vec<usize>> = IndexMap::new();
            if keys.is_empty() {
                groups.insert(Vec::new(), (0..rows.len()).collect());
            } else {
                for (i, row) in rows.iter().enumerate() {
                    let key = keys.iter().map(|&k| row[k].clone()).collect();
                    groups.entry(key).or_default().push(i);
                }
            }
            groups
                .into_iter()
                .map(|(mut key, members)| {
                    key.extend(aggregates.iter().map(|a| aggregate(a, &rows, &members)));
                    key
                })
                .collect()
        }
        BoundStep::OrderBy(sorts) => {
            let mut rows = rows;
            rows.sort_by(|x, y| {
                sorts
                    .iter()
                    .map(|s| {
                        let o = compare_cells(&x[s.col], &y[s.col], s.order.as_deref());
                        if s.desc {
                            o.reverse()
                        } else {
                            o
                        }
                    })
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            });
            rows
        }
        BoundStep::Filter(pred) => rows
            .into_iter()
            .enumerate()
            .filter(|(i, row)| pred.eval(row, &EvalContext { position: *i }) == Value::Bool(true))
            .map(|(_, row)| row)
            .collect(),
        BoundStep::Derive { target, expr } => rows
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                let v = expr.eval(&row, &EvalContext { position: i });
                match target {
                    Some(t) => row[*t] = v,
                    None => row.push(v),
                }
                row
            })
            .collect(),
        BoundStep::Bin { col, bins } => bin_rows(rows, *col, *bins),
        BoundStep::Join {
            right,
            left_keys,
            right_keys,
        } => {
            let right_table = datasets
                .get(right)
                .ok_or_else(|| TransformError::UnresolvedSource(right.clone()))?;
            let mut index: HashMap<Vec<&Value>, Vec<usize>> = HashMap::new();
            for (i, row) in right_table.rows().iter().enumerate() {
                let key: Vec<&Value> = right_keys.iter().map(|&k| &row[k]).collect();
                if key.iter().any(|v| v.is_null()) {
                    continue;
                }
                index.entry(key).or_default().push(i);
            }
            let mut out = Vec::new();
            for row in rows {
                let key: Vec<&Value> = left_keys.iter().map(|&k| &row[k]).collect();
                if let Some(matches) = index.get(&key) {
                    for &m in matches {
                        let mut joined = row.clone();
                        joined.extend(right_table.rows()[m].iter().cloned());
                        out.push(joined);
                    }
                }
            }
            out
        }
    })
}

fn aggregate(agg: &BoundAggregate, rows: &[Vec<Value>], members: &[usize]) -> Value {
    let values = || {
        members
            .iter()
            .map(|&i| &rows[i][agg.col.expect("aggregate column")])
            .filter(|v| !v.is_null())
    };
    match agg.expr {
        AggregateExpr::Count => Value::Number(members.len() as f64),
        AggregateExpr::Sum(_) | AggregateExpr::Mean(_) => {
            let nums: Vec<f64> = values().filter_map(Value::as_f64).collect();
            if nums.is_empty() {
                return Value::Null;
            }
            let sum: f64 = nums.iter().sum();
            match agg.expr {
                AggregateExpr::Sum(_) => Value::Number(sum),
                _ => Value::Number(sum / nums.len() as f64),
            }
        }
        AggregateExpr::Min(_) => values()
            .min_by(|a, b| compare_cells(a, b, agg.order.as_deref()))
            .cloned()
            .unwrap_or(Value::Null),
        AggregateExpr::Max(_) => values()
            .max_by(|a, b| compare_cells(a, b, agg.order.as_deref()))
            .cloned()
            .unwrap_or(Value::Null),
    }
}

/// Assigns each non-null value to a `[start, end)` bin; the last bin is
/// closed at the column maximum. Rows with a null value are dropped.
fn bin_rows(rows: Vec<Vec<Value>>, col: usize, bins: BinSpec) -> Vec<Vec<Value>> {
    let values: Vec<f64> = rows.iter().filter_map(|r| r[col].as_f64()).collect();
    if values.is_empty() {
        return Vec::new();
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (width, count) = match bins {
        BinSpec::Count(k) => ((max - min) / k as f64, k),
        BinSpec::Step(w) => (w, (((max - min) / w).ceil() as usize).max(1)),
    };
    let start = |i: usize| min + i as f64 * width;
    let end = |i: usize| {
        if i + 1 == count {
            start(count).max(max)
        } else {
            start(i + 1)
        }
    };
    rows.into_iter()
        .filter_map(|mut row| {
            let v = row[col].as_f64()?;
            let mut idx = if width > 0.0 {
                (((v - min) / width).floor().max(0.0) as usize).min(count - 1)
            } else {
                0
            };
            // Rounding can put `v` one bin off; nudge so start <= v < end.
            while idx > 0 && v < start(idx) {
                idx -= 1;
            }
            while idx + 1 < count && v >= start(idx + 1) {
                idx += 1;
            }
            row.push(Value::Number(start(idx)));
            row.push(Value::Number(end(idx)));
            Some(row)
        })
        .collect()
}

/// Runs `spec` over `datasets`, producing a new table.
pub fn execute_pipeline(spec: &TransformSpec, datasets: &Datasets) -> Result<Table, TransformError> {
    bind_pipeline(spec, datasets)?.execute(datasets)
}

/// Every source attribute the spec reads, as `(source, attribute)` pairs.
/// Columns created inside the pipeline are not source attributes.
pub fn referenced_attributes(
    spec: &TransformSpec,
    datasets: &Datasets,
) -> Result<BTreeSet<(String, String)>, TransformError> {
    Ok(bind_pipeline(spec, datasets)?.referenced)
}
