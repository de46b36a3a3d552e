//! Expression trees for filter/derive predicates and rollup aggregates.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::tabular::{Value, WILDCARD};

/// An attribute name, or the `*` wildcard standing for any attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttrRef {
    Name(String),
    Wildcard,
}

impl AttrRef {
    pub fn name(name: impl Into<String>) -> Self {
        let name = name.into();
        if name == WILDCARD {
            AttrRef::Wildcard
        } else {
            AttrRef::Name(name)
        }
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, AttrRef::Wildcard)
    }

    pub fn as_name(&self) -> Option<&str> {
        match self {
            AttrRef::Name(n) => Some(n),
            AttrRef::Wildcard => None,
        }
    }

    /// Template matching: a wildcard on the template side matches anything.
    pub fn matches(&self, concrete: &AttrRef) -> bool {
        self.is_wildcard() || self == concrete
    }
}

impl fmt::Display for AttrRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrRef::Name(n) => f.write_str(n),
            AttrRef::Wildcard => f.write_str(WILDCARD),
        }
    }
}

impl From<&str> for AttrRef {
    fn from(s: &str) -> Self {
        AttrRef::name(s)
    }
}

impl Serialize for AttrRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AttrRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Err(serde::de::Error::custom("empty attribute name"));
        }
        Ok(AttrRef::name(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    /// Binding power; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_arithmetic(self) -> bool {
        self.precedence() >= 4
    }
}

const UNARY_PRECEDENCE: u8 = 6;

/// The closed set of callable functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Function {
    Count,
    Sum,
    Mean,
    Min,
    Max,
    Rank,
    Year,
    IsValid,
}

impl Function {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "count" => Function::Count,
            "sum" => Function::Sum,
            "mean" => Function::Mean,
            "min" => Function::Min,
            "max" => Function::Max,
            "rank" => Function::Rank,
            "year" => Function::Year,
            "isValid" => Function::IsValid,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Count => "count",
            Function::Sum => "sum",
            Function::Mean => "mean",
            Function::Min => "min",
            Function::Max => "max",
            Function::Rank => "rank",
            Function::Year => "year",
            Function::IsValid => "isValid",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Function::Count | Function::Rank => 0,
            _ => 1,
        }
    }

    pub fn is_aggregate(self) -> bool {
        matches!(
            self,
            Function::Count | Function::Sum | Function::Mean | Function::Min | Function::Max
        )
    }
}

/// Parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Value),
    Column(AttrRef),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Function,
        args: Vec<Expr>,
    },
}

impl Expr {
    pub fn lit(v: impl Into<Value>) -> Self {
        Expr::Literal(v.into())
    }

    pub fn col(name: &str) -> Self {
        Expr::Column(AttrRef::name(name))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn call(func: Function, args: Vec<Expr>) -> Self {
        Expr::Call { func, args }
    }

    pub fn has_wildcard(&self) -> bool {
        match self {
            Expr::Literal(_) => false,
            Expr::Column(a) => a.is_wildcard(),
            Expr::Unary { operand, .. } => operand.has_wildcard(),
            Expr::Binary { lhs, rhs, .. } => lhs.has_wildcard() || rhs.has_wildcard(),
            Expr::Call { args, .. } => args.iter().any(Expr::has_wildcard),
        }
    }

    /// Column names referenced anywhere in the tree.
    pub fn columns(&self) -> Vec<&AttrRef> {
        let mut out = Vec::new();
        self.visit_columns(&mut out);
        out
    }

    fn visit_columns<'a>(&'a self, out: &mut Vec<&'a AttrRef>) {
        match self {
            Expr::Literal(_) => {}
            Expr::Column(a) => out.push(a),
            Expr::Unary { operand, .. } => operand.visit_columns(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.visit_columns(out);
                rhs.visit_columns(out);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.visit_columns(out)),
        }
    }

    /// Structural match where a wildcard column in `self` matches any column
    /// in `concrete`.
    pub fn matches(&self, concrete: &Expr) -> bool {
        match (self, concrete) {
            (Expr::Literal(a), Expr::Literal(b)) => a == b,
            (Expr::Column(a), Expr::Column(b)) => a.matches(b),
            (Expr::Unary { op: o1, operand: a }, Expr::Unary { op: o2, operand: b }) => o1 == o2 && a.matches(b),
            (
                Expr::Binary {
                    op: o1,
                    lhs: l1,
                    rhs: r1,
                },
                Expr::Binary {
                    op: o2,
                    lhs: l2,
                    rhs: r2,
                },
            ) => o1 == o2 && l1.matches(l2) && r1.matches(r2),
            (Expr::Call { func: f1, args: a1 }, Expr::Call { func: f2, args: a2 }) => {
                f1 == f2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| x.matches(y))
            }
            _ => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Unary { .. } => UNARY_PRECEDENCE,
            _ => u8::MAX,
        }
    }
}

pub(crate) fn is_plain_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "true" | "false" | "null")
}

fn write_column(f: &mut fmt::Formatter<'_>, attr: &AttrRef) -> fmt::Result {
    match attr {
        AttrRef::Wildcard => f.write_str("*"),
        AttrRef::Name(n) if is_plain_identifier(n) => f.write_str(n),
        AttrRef::Name(n) => write!(f, "`{}`", n.replace('`', "``")),
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, v: &Value) -> fmt::Result {
    match v {
        Value::Null => f.write_str("null"),
        Value::Number(n) => write!(f, "{n}"),
        Value::Bool(b) => write!(f, "{b}"),
        Value::Text(s) => {
            f.write_str("\"")?;
            for c in s.chars() {
                match c {
                    '"' => f.write_str("\\\"")?,
                    '\\' => f.write_str("\\\\")?,
                    '\n' => f.write_str("\\n")?,
                    '\t' => f.write_str("\\t")?,
                    c => write!(f, "{c}")?,
                }
            }
            f.write_str("\"")
        }
        // Dates have no literal syntax; render as their ISO string.
        Value::Date(d) => write!(f, "\"{}\"", d.format("%Y-%m-%d")),
    }
}

impl fmt::Display for Expr {
    /// Canonical text; re-parsing it yields the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(v) => write_literal(f, v),
            Expr::Column(a) => write_column(f, a),
            Expr::Unary { op, operand } => {
                f.write_str(match op {
                    UnaryOp::Not => "!",
                    UnaryOp::Neg => "-",
                })?;
                let wrap = operand.precedence() < UNARY_PRECEDENCE
                    || (*op == UnaryOp::Neg && matches!(**operand, Expr::Literal(Value::Number(_))));
                if wrap {
                    write!(f, "({operand})")
                } else {
                    write!(f, "{operand}")
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                if lhs.precedence() < p {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if rhs.precedence() <= p {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Rollup aggregate over one group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AggregateExpr {
    Count,
    Sum(AttrRef),
    Mean(AttrRef),
    Min(AttrRef),
    Max(AttrRef),
}

impl AggregateExpr {
    pub fn attribute(&self) -> Option<&AttrRef> {
        match self {
            AggregateExpr::Count => None,
            AggregateExpr::Sum(a) | AggregateExpr::Mean(a) | AggregateExpr::Min(a) | AggregateExpr::Max(a) => Some(a),
        }
    }

    pub fn function(&self) -> Function {
        match self {
            AggregateExpr::Count => Function::Count,
            AggregateExpr::Sum(_) => Function::Sum,
            AggregateExpr::Mean(_) => Function::Mean,
            AggregateExpr::Min(_) => Function::Min,
            AggregateExpr::Max(_) => Function::Max,
        }
    }

    pub fn matches(&self, concrete: &AggregateExpr) -> bool {
        self.function() == concrete.function()
            && match (self.attribute(), concrete.attribute()) {
                (Some(a), Some(b)) => a.matches(b),
                (None, None) => true,
                _ => false,
            }
    }

    /// Converts a parsed call such as `sum(rent)` into an aggregate.
    pub fn from_expr(expr: &Expr) -> Option<Self> {
        let Expr::Call { func, args } = expr else {
            return None;
        };
        let attr = || match args.as_slice() {
            [Expr::Column(a)] => Some(a.clone()),
            _ => None,
        };
        Some(match func {
            Function::Count if args.is_empty() => AggregateExpr::Count,
            Function::Sum => AggregateExpr::Sum(attr()?),
            Function::Mean => AggregateExpr::Mean(attr()?),
            Function::Min => AggregateExpr::Min(attr()?),
            Function::Max => AggregateExpr::Max(attr()?),
            _ => return None,
        })
    }

    pub fn to_expr(&self) -> Expr {
        let args = self
            .attribute()
            .map(|a| vec![Expr::Column(a.clone())])
            .unwrap_or_default();
        Expr::call(self.function(), args)
    }
}

impl fmt::Display for AggregateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}
