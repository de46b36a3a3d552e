//! DOT and CSV artifacts.

use std::fmt::Write as _;

use insightkit::knowledge::{AnalyticResult, KnowledgeGraph, NodeKind};
use insightkit::tabular::write_csv_string;
use insightkit::transforms::Datasets;

use crate::CliError;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

/// Kind label of a node; insights with wildcards read as objectives.
pub fn kind_label(graph: &KnowledgeGraph, name: &str) -> &'static str {
    match graph.node(name).map(|n| &n.kind) {
        Ok(NodeKind::Insight(_)) if graph.is_objective(name).unwrap_or(true) => "objective",
        Ok(kind) => kind.name(),
        Err(_) => "unknown",
    }
}

fn shape(kind: &str) -> &'static str {
    match kind {
        "domain" => "ellipse",
        "analytic" => "box",
        "insight" => "diamond",
        "objective" => "hexagon",
        _ => "octagon",
    }
}

/// The graph as a DOT digraph. Nodes are labelled with name and kind;
/// source/target edges are solid, related edges dashed and undirected, each
/// listed once.
pub fn to_dot(graph: &KnowledgeGraph) -> String {
    let mut out = String::from("digraph knowledge {\n");
    for n in graph.nodes() {
        let kind = kind_label(graph, n.name());
        let label = format!("\"{}\\n({kind})\"", escape(n.name()));
        writeln!(out, "  {} [label={}, shape={}];", quote(n.name()), label, shape(kind)).expect("string write");
    }
    for n in graph.nodes() {
        for t in &n.core.targets {
            writeln!(out, "  {} -> {} [style=solid];", quote(n.name()), quote(t)).expect("string write");
        }
    }
    for n in graph.nodes() {
        for r in n.core.related.iter().filter(|r| n.name() < r.as_str()) {
            writeln!(out, "  {} -> {} [style=dashed, dir=none];", quote(n.name()), quote(r)).expect("string write");
        }
    }
    out.push_str("}\n");
    out
}

/// An analytic node's result table as CSV: the pipeline output, or for a
/// model node the table it was trained on.
pub fn result_csv(graph: &KnowledgeGraph, datasets: &Datasets, target: &str) -> Result<String, CliError> {
    graph.analytic(target)?;
    let result = graph.results(target, datasets)?;
    let table = match result.as_ref() {
        AnalyticResult::Table(t) => t,
        AnalyticResult::Model { training, .. } => training,
    };
    Ok(write_csv_string(table))
}
