//! Declarative data-transformation pipelines over named tables.
//!
//! A [`TransformSpec`] lists its source tables and an ordered list of
//! [`TransformStep`]s. Specs serialize to JSON with expressions stored as
//! text, and may contain `*` wildcards, in which case they are templates:
//! matchable, but not executable.

mod bind;
mod expr;
mod parser;
mod pipeline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tabular::TableError;

pub use bind::{eval_expression, BindOptions, BoundExpr, ColumnInfo, EvalContext, ExprType};
pub use expr::{AggregateExpr, AttrRef, BinaryOp, Expr, Function, UnaryOp};
pub use parser::parse_expression;
pub use pipeline::{bind_pipeline, execute_pipeline, referenced_attributes, BoundPipeline, Datasets};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unresolved source table `{0}`")]
    UnresolvedSource(String),
    #[error("wildcard present in {0}: this is an objective template, not an executable spec")]
    WildcardPresent(String),
    #[error("unknown attribute `{attribute}`{}", fmt_step(*.step))]
    UnknownAttribute { attribute: String, step: Option<usize> },
    #[error("type mismatch{}: {detail}", fmt_step(*.step))]
    TypeMismatch { step: Option<usize>, detail: String },
    #[error("aggregate misuse{}: {detail}", fmt_step(*.step))]
    AggregateMisuse { step: Option<usize>, detail: String },
    #[error("invalid pipeline{}: {detail}", fmt_step(*.step))]
    InvalidPipeline { step: Option<usize>, detail: String },
    #[error("invalid transform spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

fn fmt_step(step: Option<usize>) -> String {
    step.map(|s| format!(" in step {s}")).unwrap_or_default()
}

impl TransformError {
    /// Attaches a step index to errors raised while binding that step.
    pub(crate) fn at_step(self, index: usize) -> Self {
        match self {
            TransformError::UnknownAttribute { attribute, step: None } => TransformError::UnknownAttribute {
                attribute,
                step: Some(index),
            },
            TransformError::TypeMismatch { detail, step: None } => TransformError::TypeMismatch {
                detail,
                step: Some(index),
            },
            TransformError::AggregateMisuse { detail, step: None } => TransformError::AggregateMisuse {
                detail,
                step: Some(index),
            },
            TransformError::InvalidPipeline { detail, step: None } => TransformError::InvalidPipeline {
                detail,
                step: Some(index),
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SortKey {
    pub attribute: AttrRef,
    pub direction: Direction,
}

impl SortKey {
    pub fn asc(attribute: &str) -> Self {
        Self {
            attribute: attribute.into(),
            direction: Direction::Asc,
        }
    }

    pub fn desc(attribute: &str) -> Self {
        Self {
            attribute: attribute.into(),
            direction: Direction::Desc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JoinKey {
    pub left: AttrRef,
    pub right: AttrRef,
}

/// A named rollup output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Aggregate {
    pub name: String,
    pub expr: AggregateExpr,
}

impl Aggregate {
    pub fn new(name: impl Into<String>, expr: AggregateExpr) -> Self {
        Self {
            name: name.into(),
            expr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinSpec {
    /// Split `[min, max]` into this many equal-width bins.
    Count(usize),
    /// Fixed bin width, anchored at the column minimum.
    Step(f64),
}

/// One relational step.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformStep {
    GroupBy {
        keys: Vec<AttrRef>,
    },
    Rollup {
        aggregates: Vec<Aggregate>,
    },
    OrderBy {
        keys: Vec<SortKey>,
    },
    Filter {
        predicate: Expr,
    },
    Derive {
        name: String,
        expr: Expr,
    },
    Bin {
        attribute: AttrRef,
        bins: BinSpec,
        name: String,
    },
    Join {
        right: String,
        on: Vec<JoinKey>,
    },
    /// Template placeholder standing for any single step.
    Wildcard,
}

impl TransformStep {
    pub fn groupby(keys: &[&str]) -> Self {
        TransformStep::GroupBy {
            keys: keys.iter().map(|k| AttrRef::name(*k)).collect(),
        }
    }

    pub fn rollup(aggregates: Vec<Aggregate>) -> Self {
        TransformStep::Rollup { aggregates }
    }

    pub fn count(name: &str) -> Self {
        TransformStep::rollup(vec![Aggregate::new(name, AggregateExpr::Count)])
    }

    pub fn orderby(keys: Vec<SortKey>) -> Self {
        TransformStep::OrderBy { keys }
    }

    /// Filter from expression text.
    pub fn filter(predicate: &str) -> Result<Self, TransformError> {
        Ok(TransformStep::Filter {
            predicate: parse_expression(predicate)?,
        })
    }

    /// Derive from expression text.
    pub fn derive(name: &str, expr: &str) -> Result<Self, TransformError> {
        Ok(TransformStep::Derive {
            name: name.to_string(),
            expr: parse_expression(expr)?,
        })
    }

    pub fn op_name(&self) -> &'static str {
        match self {
            TransformStep::GroupBy { .. } => "groupby",
            TransformStep::Rollup { .. } => "rollup",
            TransformStep::OrderBy { .. } => "orderby",
            TransformStep::Filter { .. } => "filter",
            TransformStep::Derive { .. } => "derive",
            TransformStep::Bin { .. } => "bin",
            TransformStep::Join { .. } => "join",
            TransformStep::Wildcard => "*",
        }
    }

    pub fn has_wildcard(&self) -> bool {
        match self {
            TransformStep::Wildcard => true,
            TransformStep::GroupBy { keys } => keys.iter().any(AttrRef::is_wildcard),
            TransformStep::Rollup { aggregates } => aggregates
                .iter()
                .any(|a| a.expr.attribute().is_some_and(AttrRef::is_wildcard)),
            TransformStep::OrderBy { keys } => keys.iter().any(|k| k.attribute.is_wildcard()),
            TransformStep::Filter { predicate } => predicate.has_wildcard(),
            TransformStep::Derive { expr, .. } => expr.has_wildcard(),
            TransformStep::Bin { attribute, .. } => attribute.is_wildcard(),
            TransformStep::Join { on, .. } => on.iter().any(|k| k.left.is_wildcard() || k.right.is_wildcard()),
        }
    }

    /// Template matching: wildcards in `self` match anything at their position.
    pub fn matches(&self, concrete: &TransformStep) -> bool {
        use TransformStep as S;
        match (self, concrete) {
            (S::Wildcard, _) => true,
            (S::GroupBy { keys: a }, S::GroupBy { keys: b }) => zip_all(a, b, AttrRef::matches),
            (S::Rollup { aggregates: a }, S::Rollup { aggregates: b }) => {
                zip_all(a, b, |x, y| x.name == y.name && x.expr.matches(&y.expr))
            }
            (S::OrderBy { keys: a }, S::OrderBy { keys: b }) => zip_all(a, b, |x, y| {
                x.direction == y.direction && x.attribute.matches(&y.attribute)
            }),
            (S::Filter { predicate: a }, S::Filter { predicate: b }) => a.matches(b),
            (S::Derive { name: n1, expr: e1 }, S::Derive { name: n2, expr: e2 }) => n1 == n2 && e1.matches(e2),
            (
                S::Bin {
                    attribute: a1,
                    bins: b1,
                    name: n1,
                },
                S::Bin {
                    attribute: a2,
                    bins: b2,
                    name: n2,
                },
            ) => a1.matches(a2) && b1 == b2 && n1 == n2,
            (S::Join { right: r1, on: o1 }, S::Join { right: r2, on: o2 }) => {
                r1 == r2 && zip_all(o1, o2, |x, y| x.left.matches(&y.left) && x.right.matches(&y.right))
            }
            _ => false,
        }
    }
}

fn zip_all<T>(a: &[T], b: &[T], f: impl Fn(&T, &T) -> bool) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| f(x, y))
}

/// Declarative pipeline: the first step consumes `sources[0]`; each later
/// step consumes the previous step's output. Other sources may only be
/// referenced by joins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub sources: Vec<String>,
    #[serde(default)]
    pub transforms: Vec<TransformStep>,
}

impl TransformSpec {
    pub fn new(sources: &[&str], transforms: Vec<TransformStep>) -> Self {
        Self {
            sources: sources.iter().map(|s| s.to_string()).collect(),
            transforms,
        }
    }

    pub fn has_wildcard(&self) -> bool {
        self.transforms.iter().any(TransformStep::has_wildcard)
    }

    /// Structural match of a template against a concrete spec. Sources must
    /// be equal, step lists must have equal length, and every wildcard in
    /// the template matches whatever sits at that position.
    pub fn matches(&self, concrete: &TransformSpec) -> bool {
        self.sources == concrete.sources && zip_all(&self.transforms, &concrete.transforms, TransformStep::matches)
    }

    pub fn from_json_str(text: &str) -> Result<Self, TransformError> {
        serde_json::from_str(text).map_err(|e| TransformError::InvalidSpec(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("transform spec serializes")
    }
}

// --- JSON form -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StepDoc {
    Wildcard(String),
    Op(OpDoc),
}

#[derive(Serialize, Deserialize)]
struct AggregateDoc {
    name: String,
    expr: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum JoinKind {
    Inner,
}

fn default_join_kind() -> JoinKind {
    JoinKind::Inner
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "lowercase", deny_unknown_fields)]
enum OpDoc {
    Groupby {
        keys: Vec<AttrRef>,
    },
    Rollup {
        aggregates: Vec<AggregateDoc>,
    },
    Orderby {
        keys: Vec<SortKey>,
    },
    Filter {
        predicate: String,
    },
    Derive {
        name: String,
        expr: String,
    },
    Bin {
        attribute: AttrRef,
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<f64>,
    },
    Join {
        right: String,
        on: Vec<JoinKey>,
        #[serde(default = "default_join_kind")]
        kind: JoinKind,
    },
}

impl Serialize for TransformStep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let doc = match self.clone() {
            TransformStep::Wildcard => StepDoc::Wildcard("*".into()),
            TransformStep::GroupBy { keys } => StepDoc::Op(OpDoc::Groupby { keys }),
            TransformStep::Rollup { aggregates } => StepDoc::Op(OpDoc::Rollup {
                aggregates: aggregates
                    .into_iter()
                    .map(|a| AggregateDoc {
                        name: a.name,
                        expr: a.expr.to_string(),
                    })
                    .collect(),
            }),
            TransformStep::OrderBy { keys } => StepDoc::Op(OpDoc::Orderby { keys }),
            TransformStep::Filter { predicate } => StepDoc::Op(OpDoc::Filter {
                predicate: predicate.to_string(),
            }),
            TransformStep::Derive { name, expr } => StepDoc::Op(OpDoc::Derive {
                name,
                expr: expr.to_string(),
            }),
            TransformStep::Bin { attribute, bins, name } => StepDoc::Op(OpDoc::Bin {
                attribute,
                name,
                count: match bins {
                    BinSpec::Count(k) => Some(k),
                    BinSpec::Step(_) => None,
                },
                step: match bins {
                    BinSpec::Step(w) => Some(w),
                    BinSpec::Count(_) => None,
                },
            }),
            TransformStep::Join { right, on } => StepDoc::Op(OpDoc::Join {
                right,
                on,
                kind: JoinKind::Inner,
            }),
        };
        doc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TransformStep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = StepDoc::deserialize(d)?;
        let parse = |text: &str| parse_expression(text).map_err(D::Error::custom);
        Ok(match doc {
            StepDoc::Wildcard(s) if s == "*" => TransformStep::Wildcard,
            StepDoc::Wildcard(s) => {
                return Err(D::Error::custom(format!(
                    "expected a step object or \"*\", found \"{s}\""
                )))
            }
            StepDoc::Op(OpDoc::Groupby { keys }) => TransformStep::GroupBy { keys },
            StepDoc::Op(OpDoc::Rollup { aggregates }) => TransformStep::Rollup {
                aggregates: aggregates
                    .into_iter()
                    .map(|a| {
                        let e = parse(&a.expr)?;
                        let expr = AggregateExpr::from_expr(&e).ok_or_else(|| {
                            D::Error::custom(format!("`{}` is not an aggregate (count/sum/mean/min/max)", a.expr))
                        })?;
                        Ok(Aggregate { name: a.name, expr })
                    })
                    .collect::<Result<_, D::Error>>()?,
            },
            StepDoc::Op(OpDoc::Orderby { keys }) => TransformStep::OrderBy { keys },
            StepDoc::Op(OpDoc::Filter { predicate }) => TransformStep::Filter {
                predicate: parse(&predicate)?,
            },
            StepDoc::Op(OpDoc::Derive { name, expr }) => TransformStep::Derive {
                name,
                expr: parse(&expr)?,
            },
            StepDoc::Op(OpDoc::Bin {
                attribute,
                name,
                count,
                step,
            }) => {
                let bins = match (count, step) {
                    (Some(k), None) => BinSpec::Count(k),
                    (None, Some(w)) => BinSpec::Step(w),
                    _ => return Err(D::Error::custom("bin needs exactly one of `count` or `step`")),
                };
                TransformStep::Bin { attribute, bins, name }
            }
            StepDoc::Op(OpDoc::Join {
                right,
                on,
                kind: JoinKind::Inner,
            }) => TransformStep::Join { right, on },
        })
    }
}
