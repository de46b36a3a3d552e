//! Tokenizer and precedence-climbing parser for the expression language.
//!
//! Precedence, tightest first: `!`/unary `-`, `* /`, `+ -`, comparisons,
//! `&&`, `||`. A `*` in operand position is the attribute wildcard.

use super::expr::{BinaryOp, Expr, Function, UnaryOp};
use super::{AttrRef, TransformError};
use crate::tabular::Value;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Str(String),
    Ident(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Bang,
    Op(BinaryOp),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> TransformError {
    TransformError::Syntax {
        offset,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, TransformError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = |tok: Tok, len: usize, out: &mut Vec<Token>| {
            out.push(Token { tok, offset: start });
            start + len
        };
        i = match c {
            b' ' | b'\t' | b'\n' | b'\r' => i + 1,
            b'(' => simple(Tok::LParen, 1, &mut out),
            b')' => simple(Tok::RParen, 1, &mut out),
            b',' => simple(Tok::Comma, 1, &mut out),
            b'+' => simple(Tok::Op(BinaryOp::Add), 1, &mut out),
            b'-' => simple(Tok::Op(BinaryOp::Sub), 1, &mut out),
            b'*' => simple(Tok::Op(BinaryOp::Mul), 1, &mut out),
            b'/' => simple(Tok::Op(BinaryOp::Div), 1, &mut out),
            b'=' if bytes.get(i + 1) == Some(&b'=') => simple(Tok::Op(BinaryOp::Eq), 2, &mut out),
            b'!' if bytes.get(i + 1) == Some(&b'=') => simple(Tok::Op(BinaryOp::Ne), 2, &mut out),
            b'!' => simple(Tok::Bang, 1, &mut out),
            b'<' if bytes.get(i + 1) == Some(&b'=') => simple(Tok::Op(BinaryOp::Le), 2, &mut out),
            b'<' => simple(Tok::Op(BinaryOp::Lt), 1, &mut out),
            b'>' if bytes.get(i + 1) == Some(&b'=') => simple(Tok::Op(BinaryOp::Ge), 2, &mut out),
            b'>' => simple(Tok::Op(BinaryOp::Gt), 1, &mut out),
            b'&' if bytes.get(i + 1) == Some(&b'&') => simple(Tok::Op(BinaryOp::And), 2, &mut out),
            b'|' if bytes.get(i + 1) == Some(&b'|') => simple(Tok::Op(BinaryOp::Or), 2, &mut out),
            b'"' | b'\'' => {
                let (s, end) = lex_string(src, i)?;
                out.push(Token {
                    tok: Tok::Str(s),
                    offset: start,
                });
                end
            }
            b'`' => {
                let (s, end) = lex_quoted_name(src, i)?;
                out.push(Token {
                    tok: Tok::Quoted(s),
                    offset: start,
                });
                end
            }
            b'0'..=b'9' | b'.' => {
                let end = scan_number(bytes, i);
                let text = &src[i..end];
                let n: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                if !n.is_finite() {
                    return Err(syntax(start, format!("number `{text}` out of range")));
                }
                out.push(Token {
                    tok: Tok::Number(n),
                    offset: start,
                });
                end
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = i + 1;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[i..end].to_string()),
                    offset: start,
                });
                end
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: src.len(),
    });
    Ok(out)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
        i += 1;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            i = j;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    i
}

fn lex_string(src: &str, start: usize) -> Result<(String, usize), TransformError> {
    let quote = src.as_bytes()[start] as char;
    let mut out = String::new();
    let mut chars = src[start + 1..].char_indices();
    while let Some((off, c)) = chars.next() {
        match c {
            c if c == quote => return Ok((out, start + 1 + off + c.len_utf8())),
            '\\' => match chars.next() {
                Some((_, 'n')) => out.push('\n'),
                Some((_, 't')) => out.push('\t'),
                Some((_, c)) => out.push(c),
                None => break,
            },
            c => out.push(c),
        }
    }
    Err(syntax(start, "unterminated string literal"))
}

fn lex_quoted_name(src: &str, start: usize) -> Result<(String, usize), TransformError> {
    let mut out = String::new();
    let rest = &src[start + 1..];
    let mut chars = rest.char_indices().peekable();
    while let Some((off, c)) = chars.next() {
        if c == '`' {
            if matches!(chars.peek(), Some((_, '`'))) {
                chars.next();
                out.push('`');
                continue;
            }
            if out.is_empty() {
                return Err(syntax(start, "empty quoted attribute name"));
            }
            return Ok((out, start + 1 + off + 1));
        }
        out.push(c);
    }
    Err(syntax(start, "unterminated quoted attribute name"))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), TransformError> {
        let t = self.next();
        if t.tok == tok {
            Ok(())
        } else {
            Err(syntax(t.offset, format!("expected {what}")))
        }
    }

    fn expression(&mut self, min_prec: u8) -> Result<Expr, TransformError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op(op) if op.precedence() >= min_prec => op,
                _ => break,
            };
            self.next();
            let rhs = self.expression(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, TransformError> {
        let t = self.next();
        match t.tok {
            Tok::Number(n) => Ok(Expr::Literal(Value::Number(n))),
            Tok::Str(s) => Ok(Expr::Literal(Value::Text(s))),
            Tok::Quoted(name) => Ok(Expr::Column(AttrRef::Name(name))),
            Tok::Op(BinaryOp::Mul) => Ok(Expr::Column(AttrRef::Wildcard)),
            Tok::Bang => Ok(Expr::Unary {
                op: UnaryOp::Not,
                operand: Box::new(self.unary_operand()?),
            }),
            Tok::Op(BinaryOp::Sub) => {
                if let Tok::Number(n) = self.peek().tok {
                    self.next();
                    return Ok(Expr::Literal(Value::Number(-n)));
                }
                Ok(Expr::Unary {
                    op: UnaryOp::Neg,
                    operand: Box::new(self.unary_operand()?),
                })
            }
            Tok::LParen => {
                let inner = self.expression(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => Ok(Expr::Literal(Value::Bool(true))),
                "false" => Ok(Expr::Literal(Value::Bool(false))),
                "null" => Ok(Expr::Literal(Value::Null)),
                _ if self.peek().tok == Tok::LParen => self.call(name, t.offset),
                _ => Ok(Expr::Column(AttrRef::Name(name))),
            },
            Tok::Eof => Err(syntax(t.offset, "unexpected end of expression")),
            _ => Err(syntax(t.offset, "expected an operand")),
        }
    }

    fn unary_operand(&mut self) -> Result<Expr, TransformError> {
        // Unary operators bind tighter than every binary operator.
        self.prefix()
    }

    fn call(&mut self, name: String, offset: usize) -> Result<Expr, TransformError> {
        let func = Function::from_name(&name).ok_or(TransformError::UnknownFunction {
            name: name.clone(),
            offset,
        })?;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek().tok != Tok::RParen {
            loop {
                args.push(self.expression(0)?);
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        if args.len() != func.arity() {
            return Err(syntax(
                offset,
                format!(
                    "{}() takes {} argument(s), got {}",
                    func.name(),
                    func.arity(),
                    args.len()
                ),
            ));
        }
        Ok(Expr::Call { func, args })
    }
}

/// Parses expression text into a tree.
pub fn parse_expression(text: &str) -> Result<Expr, TransformError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expression(0)?;
    let t = parser.peek();
    if t.tok != Tok::Eof {
        return Err(syntax(t.offset, "unexpected trailing input"));
    }
    Ok(expr)
}
