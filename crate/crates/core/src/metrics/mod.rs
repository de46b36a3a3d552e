//! Node complexity measures, graph summaries and invariant checks.
//!
//! Depth counts nodes on the longest chain of sources ending at a node, so a
//! node without sources has depth 1. Breadth is the share of available data
//! cells an analytic node reads and produces.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::knowledge::{AnalyticResult, GraphError, KnowledgeGraph, NodeKind};
use crate::transforms::{bind_pipeline, Datasets, TransformError};

/// Depth of `name`: 1 for a node without sources, else one more than its
/// deepest source.
pub fn depth(graph: &KnowledgeGraph, name: &str) -> Result<usize, GraphError> {
    graph.node(name)?;
    let mut memo = HashMap::new();
    depth_memo(graph, name, &mut memo, &mut HashSet::new())
}

fn depth_memo<'a>(
    graph: &'a KnowledgeGraph,
    name: &'a str,
    memo: &mut HashMap<&'a str, usize>,
    visiting: &mut HashSet<&'a str>,
) -> Result<usize, GraphError> {
    if let Some(&d) = memo.get(name) {
        return Ok(d);
    }
    if !visiting.insert(name) {
        return Err(GraphError::Cycle {
            from: name.to_string(),
            to: name.to_string(),
        });
    }
    let node = graph.node(name)?;
    let mut deepest = 0;
    for s in &node.core.sources {
        deepest = deepest.max(depth_memo(graph, s, memo, visiting)?);
    }
    visiting.remove(name);
    memo.insert(name, deepest + 1);
    Ok(deepest + 1)
}

/// Depth and, for analytic nodes, breadth of one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricReport {
    pub node_name: String,
    pub depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breadth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_cells: Option<usize>,
}

/// Cell counts behind a breadth value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breadth {
    pub input_cells: usize,
    pub output_cells: usize,
    pub dataset_cells: usize,
}

impl Breadth {
    /// `(input + output) / dataset`, unclamped; 0 when there are no dataset
    /// cells.
    pub fn ratio(&self) -> f64 {
        if self.dataset_cells == 0 {
            0.0
        } else {
            (self.input_cells + self.output_cells) as f64 / self.dataset_cells as f64
        }
    }
}

/// Breadth cell counts of an analytic node.
///
/// With a pipeline, input cells are one cell per row for every source
/// attribute the pipeline references and dataset cells are the cells of all
/// its sources. A model without a pipeline reads its usable training rows
/// across all of its attributes, out of its dataset's cells. The output is
/// the result table's cells, or the evaluation report's scalar count.
pub fn breadth_cells(graph: &KnowledgeGraph, name: &str, datasets: &Datasets) -> Result<Breadth, GraphError> {
    let content = graph.analytic(name)?;
    let result = graph.results(name, datasets)?;
    let (input_cells, dataset_cells) = match (&content.transform, result.as_ref()) {
        (Some(spec), _) => {
            let bound = bind_pipeline(spec, datasets)?;
            let rows_of = |s: &str| datasets.get(s).map(|t| t.row_count()).unwrap_or(0);
            let input: usize = bound.referenced_attributes().iter().map(|(s, _)| rows_of(s)).sum();
            let total: usize = spec
                .sources
                .iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .map(|s| datasets.get(s).map(|t| t.cell_count()).unwrap_or(0))
                .sum();
            (input, total)
        }
        (None, AnalyticResult::Model { model, .. }) => {
            let dataset = content
                .dataset
                .as_deref()
                .ok_or_else(|| GraphError::MissingDataset(name.to_string()))?;
            let table = datasets
                .get(dataset)
                .ok_or_else(|| TransformError::UnresolvedSource(dataset.to_string()))?;
            let rows = model.training_rows().unwrap_or(0);
            (rows * model.used_attributes().len(), table.cell_count())
        }
        (None, AnalyticResult::Table(_)) => unreachable!("a table result implies a pipeline"),
    };
    let output_cells = match result.as_ref() {
        AnalyticResult::Table(t) => t.cell_count(),
        AnalyticResult::Model { report, .. } => report.scalar_count(),
    };
    Ok(Breadth {
        input_cells,
        output_cells,
        dataset_cells,
    })
}

/// Breadth ratio of an analytic node. See [`breadth_cells`].
pub fn breadth(graph: &KnowledgeGraph, name: &str, datasets: &Datasets) -> Result<f64, GraphError> {
    Ok(breadth_cells(graph, name, datasets)?.ratio())
}

/// Depth for any node, plus breadth for analytic nodes.
pub fn metric_report(graph: &KnowledgeGraph, name: &str, datasets: &Datasets) -> Result<MetricReport, GraphError> {
    let depth = depth(graph, name)?;
    let mut report = MetricReport {
        node_name: name.to_string(),
        depth,
        breadth: None,
        input_cells: None,
        output_cells: None,
        dataset_cells: None,
    };
    if graph.node(name)?.as_analytic().is_some() {
        let b = breadth_cells(graph, name, datasets)?;
        report.breadth = Some(b.ratio());
        report.input_cells = Some(b.input_cells);
        report.output_cells = Some(b.output_cells);
        report.dataset_cells = Some(b.dataset_cells);
    }
    Ok(report)
}

/// Object, node and edge counts of a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphStats {
    pub concepts: usize,
    pub instances: usize,
    pub domain_nodes: usize,
    pub analytic_nodes: usize,
    /// Fully specified insight nodes.
    pub insights: usize,
    /// Insight nodes containing a wildcard.
    pub objectives: usize,
    pub tasks: usize,
    pub source_target_edges: usize,
    pub related_edges: usize,
    pub max_depth: usize,
    /// Nodes without sources, in registration order.
    pub roots: Vec<String>,
}

impl GraphStats {
    /// Concepts, instances and nodes together.
    pub fn object_count(&self) -> usize {
        self.concepts
            + self.instances
            + self.domain_nodes
            + self.analytic_nodes
            + self.insights
            + self.objectives
            + self.tasks
    }
}

pub fn graph_stats(graph: &KnowledgeGraph) -> GraphStats {
    let mut stats = GraphStats {
        concepts: graph.concepts().count(),
        instances: graph.instances().count(),
        ..Default::default()
    };
    let mut related = 0;
    let mut depths = HashMap::new();
    for node in graph.nodes() {
        match &node.kind {
            NodeKind::Domain { .. } => stats.domain_nodes += 1,
            NodeKind::Analytic(_) => stats.analytic_nodes += 1,
            NodeKind::Insight(_) => {
                if graph.is_fully_specified(node.name()).unwrap_or(false) {
                    stats.insights += 1;
                } else {
                    stats.objectives += 1;
                }
            }
            NodeKind::Task(_) => stats.tasks += 1,
        }
        stats.source_target_edges += node.core.targets.len();
        related += node.core.related.len();
        if node.core.sources.is_empty() {
            stats.roots.push(node.name().to_string());
        }
        let d = depth_memo(graph, node.name(), &mut depths, &mut HashSet::new()).unwrap_or(0);
        stats.max_depth = stats.max_depth.max(d);
    }
    stats.related_edges = related / 2;
    stats
}

/// A broken graph invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub nodes: Vec<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// A concept parent, instance concept or domain instance is missing.
    Resolution,
    /// The concept hierarchy has a cycle.
    ConceptCycle,
    /// Instance metadata has a value without a matching attribute or of the
    /// wrong type.
    Metadata,
    /// An edge endpoint is not a registered node.
    EdgeEndpoint,
    SelfEdge,
    DuplicateEdge,
    /// A source/target or related edge is recorded on one endpoint only.
    EdgeSymmetry,
    /// Source/target edges form a cycle.
    Cycle,
    /// An analytic node has neither transform nor relationship.
    AnalyticContent,
    /// A wildcard-free insight has an empty, dangling or mistyped member.
    InsightMembers,
    /// A task's objective or insights are missing or not fit for purpose.
    TaskMembers,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("rule serializes");
        f.write_str(s.as_str().expect("rule is a string"))
    }
}

fn violation(rule: Rule, nodes: &[&str], message: String) -> Violation {
    Violation {
        rule,
        nodes: nodes.iter().map(|s| s.to_string()).collect(),
        message,
    }
}

/// Every broken invariant, in a stable order. Empty iff the graph is valid.
pub fn validate(graph: &KnowledgeGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for c in graph.concepts() {
        for p in &c.parents {
            if graph.concept(p).is_err() {
                out.push(violation(
                    Rule::Resolution,
                    &[&c.name],
                    format!("concept `{}` has unknown parent `{p}`", c.name),
                ));
            }
        }
    }
    out.extend(concept_cycles(graph));
    for i in graph.instances() {
        if graph.concept(&i.concept).is_err() {
            out.push(violation(
                Rule::Resolution,
                &[&i.name],
                format!("instance `{}` has unknown concept `{}`", i.name, i.concept),
            ));
        }
        for (key, value) in &i.metadata.values {
            match i.metadata.attributes.iter().find(|a| a.name == *key) {
                None => out.push(violation(
                    Rule::Metadata,
                    &[&i.name],
                    format!("instance `{}` has metadata value `{key}` without an attribute", i.name),
                )),
                Some(a) if !a.admits(value) => out.push(violation(
                    Rule::Metadata,
                    &[&i.name],
                    format!("instance `{}` metadata `{key}` is not {}", i.name, a.attribute_type),
                )),
                Some(_) => {}
            }
        }
    }
    for node in graph.nodes() {
        let name = node.name();
        check_edges(graph, name, &mut out);
        match &node.kind {
            NodeKind::Domain { instance } => {
                if graph.instance(instance).is_err() {
                    out.push(violation(
                        Rule::Resolution,
                        &[name],
                        format!("domain node `{name}` has unknown instance `{instance}`"),
                    ));
                }
            }
            NodeKind::Analytic(a) => {
                if a.transform.is_none() && a.relationship.is_none() {
                    out.push(violation(
                        Rule::AnalyticContent,
                        &[name],
                        format!("analytic node `{name}` has no transform or relationship"),
                    ));
                }
            }
            NodeKind::Insight(content) => {
                if !graph.content_has_wildcard(content) {
                    for (list, members, kind) in [
                        ("domain", content.domain.names(), "domain"),
                        ("analytic", content.analytic.names(), "analytic"),
                    ] {
                        if members.is_empty() {
                            out.push(violation(
                                Rule::InsightMembers,
                                &[name],
                                format!("insight `{name}` has an empty {list} list"),
                            ));
                        }
                        for m in members {
                            match graph.node(m) {
                                Err(_) => out.push(violation(
                                    Rule::InsightMembers,
                                    &[name, m],
                                    format!("insight `{name}` names unknown {list} member `{m}`"),
                                )),
                                Ok(n) if n.kind_name() != kind => out.push(violation(
                                    Rule::InsightMembers,
                                    &[name, m],
                                    format!(
                                        "insight `{name}` lists `{m}` as {list} knowledge but it is a {} node",
                                        n.kind_name()
                                    ),
                                )),
                                Ok(_) => {}
                            }
                        }
                    }
                }
            }
            NodeKind::Task(t) => {
                if graph.insight(&t.objective).is_err() {
                    out.push(violation(
                        Rule::TaskMembers,
                        &[name, &t.objective],
                        format!("task `{name}` has unknown objective `{}`", t.objective),
                    ));
                }
                for i in &t.insights {
                    if !graph.is_fully_specified(i).unwrap_or(false) {
                        out.push(violation(
                            Rule::TaskMembers,
                            &[name, i],
                            format!("task `{name}` lists `{i}`, which is not a fully specified insight"),
                        ));
                    }
                }
            }
        }
    }
    out.extend(source_cycles(graph));
    out
}

fn check_edges(graph: &KnowledgeGraph, name: &str, out: &mut Vec<Violation>) {
    let core = &graph.node(name).expect("iterating registered nodes").core;
    let lists: [(&str, &Vec<String>); 3] = [
        ("sources", &core.sources),
        ("targets", &core.targets),
        ("related", &core.related),
    ];
    for (label, list) in lists {
        let mut seen = HashSet::new();
        for other in list {
            if other == name {
                out.push(violation(
                    Rule::SelfEdge,
                    &[name],
                    format!("`{name}` lists itself in {label}"),
                ));
                continue;
            }
            if !seen.insert(other) {
                out.push(violation(
                    Rule::DuplicateEdge,
                    &[name, other],
                    format!("`{name}` lists `{other}` twice in {label}"),
                ));
                continue;
            }
            let Ok(peer) = graph.node(other) else {
                out.push(violation(
                    Rule::EdgeEndpoint,
                    &[name, other],
                    format!("`{name}` {label} names unknown node `{other}`"),
                ));
                continue;
            };
            let (mirror, mirror_label) = match label {
                "sources" => (&peer.core.targets, "targets"),
                "targets" => (&peer.core.sources, "sources"),
                _ => (&peer.core.related, "related"),
            };
            if !mirror.iter().any(|m| m == name) {
                out.push(violation(
                    Rule::EdgeSymmetry,
                    &[name, other],
                    format!("`{other}` is in `{name}`.{label} but `{name}` is not in `{other}`.{mirror_label}"),
                ));
            }
        }
    }
}

/// Strongly connected components with a cycle, via iterative DFS colouring.
fn source_cycles(graph: &KnowledgeGraph) -> Vec<Violation> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let names: Vec<&str> = graph.nodes().map(|n| n.name()).collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut mark = vec![Mark::New; names.len()];
    let mut out = Vec::new();
    for start in 0..names.len() {
        if mark[start] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        mark[start] = Mark::Active;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            let targets = &graph.node(names[u]).expect("registered").core.targets;
            if *next < targets.len() {
                let t = &targets[*next];
                *next += 1;
                let Some(&v) = index.get(t.as_str()) else { continue };
                match mark[v] {
                    Mark::New => {
                        mark[v] = Mark::Active;
                        stack.push((v, 0));
                    }
                    Mark::Active => {
                        let from = stack
                            .iter()
                            .position(|&(w, _)| w == v)
                            .expect("active node is on the stack");
                        let cycle: Vec<&str> = stack[from..].iter().map(|&(w, _)| names[w]).collect();
                        out.push(violation(
                            Rule::Cycle,
                            &cycle,
                            format!("source/target cycle through {}", cycle.join(" -> ")),
                        ));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[u] = Mark::Done;
                stack.pop();
            }
        }
    }
    out
}

fn concept_cycles(graph: &KnowledgeGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for c in graph.concepts() {
        let mut stack: Vec<&str> = c.parents.iter().map(String::as_str).collect();
        let mut seen = HashSet::new();
        while let Some(p) = stack.pop() {
            if p == c.name {
                out.push(violation(
                    Rule::ConceptCycle,
                    &[&c.name],
                    format!("concept `{}` is its own ancestor", c.name),
                ));
                break;
            }
            if seen.insert(p) {
                if let Ok(parent) = graph.concept(p) {
                    stack.extend(parent.parents.iter().map(String::as_str));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
