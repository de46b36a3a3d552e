//! Bind-time type checking and evaluation of expressions.
//!
//! Every type error is reported while binding against a schema; evaluating a
//! bound expression never fails.

use std::cmp::Ordering;
use std::sync::Arc;

use chrono::Datelike;

use super::expr::{BinaryOp, Expr, Function, UnaryOp};
use super::{AttrRef, TransformError};
use crate::tabular::{Attribute, AttributeType, Record, Value};

/// Static type of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprType {
    Number,
    Text,
    Bool,
    Date,
    /// The `null` literal; compatible with everything.
    Null,
}

impl ExprType {
    pub fn of_attribute(attr: &Attribute) -> Self {
        match attr.attribute_type {
            AttributeType::Quantitative => ExprType::Number,
            AttributeType::Temporal => ExprType::Date,
            AttributeType::Nominal | AttributeType::Ordinal => ExprType::Text,
        }
    }

    /// Attribute type used when an expression result is stored as a column.
    pub fn attribute_type(self) -> AttributeType {
        match self {
            ExprType::Number => AttributeType::Quantitative,
            ExprType::Date => AttributeType::Temporal,
            ExprType::Text | ExprType::Bool | ExprType::Null => AttributeType::Nominal,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ExprType::Number => "number",
            ExprType::Text => "string",
            ExprType::Bool => "boolean",
            ExprType::Date => "date",
            ExprType::Null => "null",
        }
    }

    fn unify(self, other: ExprType) -> Option<ExprType> {
        match (self, other) {
            (ExprType::Null, t) | (t, ExprType::Null) => Some(t),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }
}

/// A column visible to an expression: its attribute and static type.
#[derive(Debug, Clone)]
pub struct ColumnInfo {
    pub attribute: Attribute,
    pub ty: ExprType,
}

impl ColumnInfo {
    pub fn from_attribute(attribute: Attribute) -> Self {
        let ty = ExprType::of_attribute(&attribute);
        Self { attribute, ty }
    }
}

/// What an expression may use at its position in a pipeline.
#[derive(Debug, Clone, Copy, Default)]
pub struct BindOptions {
    /// `rank()` is available (a filter over an ordered relation).
    pub allow_rank: bool,
}

/// Per-row evaluation context.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalContext {
    /// Zero-based position of the row in the current ordering.
    pub position: usize,
}

/// A type-checked expression with column references resolved to indices.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    node: Node,
    ty: ExprType,
}

#[derive(Debug, Clone)]
enum Node {
    Lit(Value),
    Col(usize),
    Not(Box<Node>),
    Neg(Box<Node>),
    Arith(BinaryOp, Box<Node>, Box<Node>),
    Cmp {
        op: BinaryOp,
        lhs: Box<Node>,
        rhs: Box<Node>,
        order: Option<Arc<[String]>>,
    },
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Rank,
    Year(Box<Node>),
    IsValid(Box<Node>),
}

fn mismatch(detail: String) -> TransformError {
    TransformError::TypeMismatch { step: None, detail }
}

impl BoundExpr {
    /// Binds `expr` against the visible columns.
    pub fn bind(expr: &Expr, columns: &[ColumnInfo], options: BindOptions) -> Result<Self, TransformError> {
        let (node, ty, _) = bind_node(expr, columns, options)?;
        Ok(Self { node, ty })
    }

    /// Binds against a plain schema.
    pub fn bind_schema(expr: &Expr, schema: &[Attribute], options: BindOptions) -> Result<Self, TransformError> {
        let columns: Vec<_> = schema.iter().cloned().map(ColumnInfo::from_attribute).collect();
        Self::bind(expr, &columns, options)
    }

    pub fn ty(&self) -> ExprType {
        self.ty
    }

    pub fn eval(&self, row: &[Value], ctx: &EvalContext) -> Value {
        eval(&self.node, row, ctx)
    }
}

/// Binds and evaluates `expr` on a single record.
pub fn eval_expression(
    expr: &Expr,
    schema: &[Attribute],
    record: &Record,
    ctx: &EvalContext,
) -> Result<Value, TransformError> {
    let bound = BoundExpr::bind_schema(expr, schema, BindOptions { allow_rank: true })?;
    let row: Vec<Value> = schema
        .iter()
        .map(|a| record.get(&a.name).cloned().unwrap_or(Value::Null))
        .collect();
    Ok(bound.eval(&row, ctx))
}

type Bound = (Node, ExprType, Option<Arc<[String]>>);

fn bind_node(expr: &Expr, columns: &[ColumnInfo], options: BindOptions) -> Result<Bound, TransformError> {
    match expr {
        Expr::Literal(v) => {
            let ty = match v {
                Value::Null => ExprType::Null,
                Value::Number(_) => ExprType::Number,
                Value::Text(_) => ExprType::Text,
                Value::Bool(_) => ExprType::Bool,
                Value::Date(_) => ExprType::Date,
            };
            Ok((Node::Lit(v.clone()), ty, None))
        }
        Expr::Column(AttrRef::Wildcard) => Err(TransformError::WildcardPresent("expression column".into())),
        Expr::Column(AttrRef::Name(name)) => {
            let idx = columns.iter().position(|c| c.attribute.name == *name).ok_or_else(|| {
                TransformError::UnknownAttribute {
                    attribute: name.clone(),
                    step: None,
                }
            })?;
            let col = &columns[idx];
            let order = col.attribute.category_order().map(Arc::from);
            Ok((Node::Col(idx), col.ty, order))
        }
        Expr::Unary { op, operand } => {
            let (inner, ty, _) = bind_node(operand, columns, options)?;
            match (op, ty) {
                (UnaryOp::Not, ExprType::Bool | ExprType::Null) => {
                    Ok((Node::Not(Box::new(inner)), ExprType::Bool, None))
                }
                (UnaryOp::Neg, ExprType::Number | ExprType::Null) => {
                    Ok((Node::Neg(Box::new(inner)), ExprType::Number, None))
                }
                (UnaryOp::Not, t) => Err(mismatch(format!("`!` needs a boolean operand, found {}", t.name()))),
                (UnaryOp::Neg, t) => Err(mismatch(format!("unary `-` needs a number, found {}", t.name()))),
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let (l, lt, lo) = bind_node(lhs, columns, options)?;
            let (r, rt, ro) = bind_node(rhs, columns, options)?;
            let (l, r) = (Box::new(l), Box::new(r));
            if op.is_arithmetic() {
                for t in [lt, rt] {
                    if !matches!(t, ExprType::Number | ExprType::Null) {
                        return Err(mismatch(format!("`{}` needs numbers, found {}", op.symbol(), t.name())));
                    }
                }
                return Ok((Node::Arith(*op, l, r), ExprType::Number, None));
            }
            match op {
                BinaryOp::And | BinaryOp::Or => {
                    for t in [lt, rt] {
                        if !matches!(t, ExprType::Bool | ExprType::Null) {
                            return Err(mismatch(format!(
                                "`{}` needs booleans, found {}",
                                op.symbol(),
                                t.name()
                            )));
                        }
                    }
                    let node = if *op == BinaryOp::And {
                        Node::And(l, r)
                    } else {
                        Node::Or(l, r)
                    };
                    Ok((node, ExprType::Bool, None))
                }
                _ => {
                    if lt.unify(rt).is_none() {
                        return Err(mismatch(format!(
                            "cannot compare {} with {} using `{}`",
                            lt.name(),
                            rt.name(),
                            op.symbol()
                        )));
                    }
                    Ok((
                        Node::Cmp {
                            op: *op,
                            lhs: l,
                            rhs: r,
                            order: lo.or(ro),
                        },
                        ExprType::Bool,
                        None,
                    ))
                }
            }
        }
        Expr::Call { func, args } if args.len() != func.arity() => Err(mismatch(format!(
            "{}() takes {} argument(s), got {}",
            func.name(),
            func.arity(),
            args.len()
        ))),
        Expr::Call { func, args } => match func {
            f if f.is_aggregate() => Err(TransformError::AggregateMisuse {
                step: None,
                detail: format!("{}() is only allowed in rollup", f.name()),
            }),
            Function::Rank => {
                if options.allow_rank {
                    Ok((Node::Rank, ExprType::Number, None))
                } else {
                    Err(TransformError::InvalidPipeline {
                        step: None,
                        detail: "rank() is only allowed in a filter over an ordered relation".into(),
                    })
                }
            }
            Function::Year => {
                let (inner, ty, _) = bind_node(&args[0], columns, options)?;
                if !matches!(ty, ExprType::Date | ExprType::Null) {
                    return Err(mismatch(format!("year() needs a date, found {}", ty.name())));
                }
                Ok((Node::Year(Box::new(inner)), ExprType::Number, None))
            }
            Function::IsValid => {
                let (inner, _, _) = bind_node(&args[0], columns, options)?;
                Ok((Node::IsValid(Box::new(inner)), ExprType::Bool, None))
            }
            _ => unreachable!("aggregates handled above"),
        },
    }
}

fn eval(node: &Node, row: &[Value], ctx: &EvalContext) -> Value {
    match node {
        Node::Lit(v) => v.clone(),
        Node::Col(i) => row[*i].clone(),
        Node::Not(inner) => match eval(inner, row, ctx) {
            Value::Bool(b) => Value::Bool(!b),
            _ => Value::Null,
        },
        Node::Neg(inner) => match eval(inner, row, ctx) {
            Value::Number(n) => Value::Number(-n),
            _ => Value::Null,
        },
        Node::Arith(op, l, r) => {
            let (Value::Number(a), Value::Number(b)) = (eval(l, row, ctx), eval(r, row, ctx)) else {
                return Value::Null;
            };
            let out = match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div if b == 0.0 => return Value::Null,
                BinaryOp::Div => a / b,
                _ => unreachable!("arithmetic op"),
            };
            if out.is_finite() {
                Value::Number(out)
            } else {
                Value::Null
            }
        }
        Node::And(l, r) => match (eval(l, row, ctx).as_bool(), eval(r, row, ctx).as_bool()) {
            (Some(false), _) | (_, Some(false)) => Value::Bool(false),
            (Some(true), Some(true)) => Value::Bool(true),
            _ => Value::Null,
        },
        Node::Or(l, r) => match (eval(l, row, ctx).as_bool(), eval(r, row, ctx).as_bool()) {
            (Some(true), _) | (_, Some(true)) => Value::Bool(true),
            (Some(false), Some(false)) => Value::Bool(false),
            _ => Value::Null,
        },
        Node::Cmp { op, lhs, rhs, order } => {
            let a = eval(lhs, row, ctx);
            let b = eval(rhs, row, ctx);
            let ordering = match order {
                Some(order) => compare_ordinal(&a, &b, order),
                // Tags are checked at bind time; a residual mismatch (e.g. a
                // boolean cell in a nominal column) compares as null.
                None => a.compare(&b).ok().flatten(),
            };
            match ordering {
                None => Value::Null,
                Some(o) => Value::Bool(match op {
                    BinaryOp::Eq => o == Ordering::Equal,
                    BinaryOp::Ne => o != Ordering::Equal,
                    BinaryOp::Lt => o == Ordering::Less,
                    BinaryOp::Le => o != Ordering::Greater,
                    BinaryOp::Gt => o == Ordering::Greater,
                    BinaryOp::Ge => o != Ordering::Less,
                    _ => unreachable!("comparison op"),
                }),
            }
        }
        Node::Rank => Value::Number((ctx.position + 1) as f64),
        Node::Year(inner) => match eval(inner, row, ctx) {
            Value::Date(d) => Value::Number(d.year() as f64),
            _ => Value::Null,
        },
        Node::IsValid(inner) => Value::Bool(!eval(inner, row, ctx).is_null()),
    }
}

/// Position of a category in a declared order; unknown categories sort after
/// all known ones, lexicographically among themselves.
pub(crate) fn ordinal_key<'a>(v: &'a Value, order: &[String]) -> (usize, Option<&'a str>) {
    let s = v.as_str();
    match s.and_then(|s| order.iter().position(|o| o == s)) {
        Some(i) => (i, None),
        None => (order.len(), s),
    }
}

fn compare_ordinal(a: &Value, b: &Value, order: &[String]) -> Option<Ordering> {
    if a.is_null() || b.is_null() {
        return None;
    }
    match (a, b) {
        (Value::Text(_), Value::Text(_)) => Some(ordinal_key(a, order).cmp(&ordinal_key(b, order))),
        _ => a.compare(b).ok().flatten(),
    }
}
