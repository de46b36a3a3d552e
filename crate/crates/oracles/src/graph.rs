//! Audits and exhaustive path enumeration over a knowledge graph's edges.

use std::collections::{BTreeMap, BTreeSet};

use insightkit::knowledge::KnowledgeGraph;

/// The three edge lists of every node, copied out of the graph.
#[derive(Debug, Clone, Default)]
pub struct Edges {
    pub sources: BTreeMap<String, Vec<String>>,
    pub targets: BTreeMap<String, Vec<String>>,
    pub related: BTreeMap<String, Vec<String>>,
}

impl Edges {
    pub fn of(graph: &KnowledgeGraph) -> Self {
        let mut e = Edges::default();
        for n in graph.nodes() {
            e.sources.insert(n.name().to_string(), n.core.sources.clone());
            e.targets.insert(n.name().to_string(), n.core.targets.clone());
            e.related.insert(n.name().to_string(), n.core.related.clone());
        }
        e
    }
}

/// Descriptions of every broken invariant: duplicate node names, self
/// edges, duplicate list entries, asymmetric edges and source/target
/// cycles.
pub fn audit(graph: &KnowledgeGraph) -> Vec<String> {
    let mut problems = Vec::new();
    let names: Vec<&str> = graph.nodes().map(|n| n.name()).collect();
    let unique: BTreeSet<&str> = names.iter().copied().collect();
    if unique.len() != names.len() {
        problems.push("duplicate node name".to_string());
    }
    let e = Edges::of(graph);
    let lists = [
        ("sources", &e.sources, &e.targets),
        ("targets", &e.targets, &e.sources),
        ("related", &e.related, &e.related),
    ];
    for (label, list, mirror) in lists {
        for (node, others) in list {
            for (i, other) in others.iter().enumerate() {
                if other == node {
                    problems.push(format!("{node} lists itself in {label}"));
                }
                if others[..i].contains(other) {
                    problems.push(format!("{node} lists {other} twice in {label}"));
                }
                if !mirror.get(other).is_some_and(|m| m.contains(node)) {
                    problems.push(format!("{node}.{label} has {other} without the mirror entry"));
                }
            }
        }
    }
    for start in e.targets.keys() {
        if reachable(&e.targets, start).contains(start) {
            problems.push(format!("{start} lies on a source/target cycle"));
        }
    }
    problems
}

/// Nodes reachable from `start` in one or more steps.
fn reachable(next: &BTreeMap<String, Vec<String>>, start: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&str> = next
        .get(start)
        .map(|v| v.iter().map(String::as_str).collect())
        .unwrap_or_default();
    while let Some(n) = stack.pop() {
        if seen.insert(n.to_string()) {
            if let Some(more) = next.get(n) {
                stack.extend(more.iter().map(String::as_str));
            }
        }
    }
    seen
}

/// Node count of the longest chain of source edges ending at `node`,
/// found by enumerating every such chain.
pub fn longest_source_chain(sources: &BTreeMap<String, Vec<String>>, node: &str) -> usize {
    fn walk(sources: &BTreeMap<String, Vec<String>>, path: &mut Vec<String>, best: &mut usize) {
        *best = (*best).max(path.len());
        let last = path.last().expect("path starts non-empty").clone();
        for s in sources.get(&last).into_iter().flatten() {
            assert!(!path.contains(s), "cycle through {s}");
            path.push(s.clone());
            walk(sources, path, best);
            path.pop();
        }
    }
    let mut best = 0;
    walk(sources, &mut vec![node.to_string()], &mut best);
    best
}
