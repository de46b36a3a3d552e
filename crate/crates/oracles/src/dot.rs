//! A checker for a subset of the Graphviz DOT language.
//!
//! ```text
//! graph     : [strict] (graph | digraph) [ID] '{' stmt_list '}'
//! stmt_list : [stmt [';'] stmt_list]
//! stmt      : ID '=' ID | attr_stmt | edge_stmt | node_stmt
//! attr_stmt : (graph | node | edge) attr_list
//! attr_list : '[' [a_list] ']' [attr_list]
//! a_list    : ID '=' ID [';' | ','] [a_list]
//! edge_stmt : ID edgeop ID [edgeop ID ...] [attr_list]
//! node_stmt : ID [attr_list]
//! ```
//!
//! IDs are identifiers, numerals or double-quoted strings. Keywords are
//! case-insensitive; `//`, `/* */` and `#` comments are skipped. Subgraphs
//! and ports are not supported.

use std::collections::BTreeMap;

pub type Attrs = BTreeMap<String, String>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DotGraph {
    pub directed: bool,
    pub name: Option<String>,
    /// Explicit node statements, in order.
    pub nodes: Vec<(String, Attrs)>,
    /// One entry per edge (chains are expanded).
    pub edges: Vec<(String, String, Attrs)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    /// Keyword ids (unquoted) that may not stand in for a node name.
    Kw(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Semi,
    Comma,
    Arrow,
    Dash,
}

const KEYWORDS: [&str; 6] = ["strict", "graph", "digraph", "node", "edge", "subgraph"];

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let at_line_start = |i: usize| {
        chars[..i]
            .iter()
            .rev()
            .take_while(|c| **c != '\n')
            .all(|c| c.is_whitespace())
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            '#' if at_line_start(i) => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                i += 2;
                while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                    i += 1;
                }
                if i + 1 >= chars.len() {
                    return Err("unterminated comment".into());
                }
                i += 2;
            }
            '{' | '}' | '[' | ']' | '=' | ';' | ',' => {
                out.push(match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '=' => Tok::Eq,
                    ';' => Tok::Semi,
                    _ => Tok::Comma,
                });
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Tok::Arrow);
                i += 2;
            }
            '-' if chars.get(i + 1) == Some(&'-') => {
                out.push(Tok::Dash);
                i += 2;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') if chars.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push(Tok::Id(s));
            }
            _ if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if KEYWORDS.contains(&word.to_lowercase().as_str()) {
                    out.push(Tok::Kw(word.to_lowercase()));
                } else {
                    out.push(Tok::Id(word));
                }
            }
            _ if c.is_ascii_digit() || c == '.' || c == '-' => {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if word.parse::<f64>().is_err() {
                    return Err(format!("bad numeral `{word}`"));
                }
                out.push(Tok::Id(word));
            }
            _ => return Err(format!("unexpected character `{c}`")),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), String> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(format!("expected {want:?}, found {other:?}")),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Id(s)) => Ok(s),
            other => Err(format!("expected an ID, found {other:?}")),
        }
    }

    fn attr_lists(&mut self) -> Result<Attrs, String> {
        let mut attrs = Attrs::new();
        while self.peek() == Some(&Tok::LBracket) {
            self.next();
            while self.peek() != Some(&Tok::RBracket) {
                let k = self.id()?;
                self.expect(Tok::Eq)?;
                let v = self.id()?;
                attrs.insert(k, v);
                if matches!(self.peek(), Some(Tok::Semi | Tok::Comma)) {
                    self.next();
                }
            }
            self.expect(Tok::RBracket)?;
        }
        Ok(attrs)
    }
}

/// Parses `src`, returning the statements it declares or a description of
/// the first syntax error.
pub fn parse(src: &str) -> Result<DotGraph, String> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let mut g = DotGraph::default();
    if p.peek() == Some(&Tok::Kw("strict".into())) {
        p.next();
    }
    g.directed = match p.next() {
        Some(Tok::Kw(k)) if k == "digraph" => true,
        Some(Tok::Kw(k)) if k == "graph" => false,
        other => return Err(format!("expected graph or digraph, found {other:?}")),
    };
    if let Some(Tok::Id(_)) = p.peek() {
        g.name = Some(p.id()?);
    }
    p.expect(Tok::LBrace)?;
    loop {
        match p.peek().cloned() {
            Some(Tok::RBrace) => {
                p.next();
                break;
            }
            None => return Err("missing closing brace".into()),
            Some(Tok::Kw(k)) if k == "graph" || k == "node" || k == "edge" => {
                p.next();
                if p.peek() != Some(&Tok::LBracket) {
                    return Err(format!("`{k}` needs an attribute list"));
                }
                p.attr_lists()?;
            }
            Some(Tok::Id(_)) => {
                let first = p.id()?;
                if p.peek() == Some(&Tok::Eq) {
                    p.next();
                    p.id()?;
                } else {
                    let op = if g.directed { Tok::Arrow } else { Tok::Dash };
                    let mut chain = vec![first];
                    while matches!(p.peek(), Some(Tok::Arrow | Tok::Dash)) {
                        if p.next() != Some(op.clone()) {
                            return Err("edge operator does not match the graph kind".into());
                        }
                        chain.push(p.id()?);
                    }
                    let attrs = p.attr_lists()?;
                    if chain.len() == 1 {
                        g.nodes.push((chain.pop().expect("one id"), attrs));
                    } else {
                        for w in chain.windows(2) {
                            g.edges.push((w[0].clone(), w[1].clone(), attrs.clone()));
                        }
                    }
                }
            }
            other => return Err(format!("unexpected token {other:?}")),
        }
        if p.peek() == Some(&Tok::Semi) {
            p.next();
        }
    }
    if p.peek().is_some() {
        return Err("trailing input after the graph".into());
    }
    Ok(g)
}
