//! Subcommand bodies. Each returns the text to print.

use std::path::{Path, PathBuf};

use insightkit::knowledge::{AnalyticResult, KnowledgeGraph};
use insightkit::metrics::{graph_stats, metric_report};
use insightkit::transforms::Datasets;
use serde_json::{json, Map, Value as Json};

use crate::export::{result_csv, to_dot};
use crate::scenarios::{self, ScenarioId};
use crate::spec_file::SpecFile;
use crate::CliError;

/// Where a graph comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Spec(PathBuf),
    Scenario(ScenarioId),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Options {
    /// `name=path` dataset overrides.
    pub data: Vec<(String, PathBuf)>,
    /// Isolation forest seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Csv,
}

fn pretty(json: &Json) -> String {
    let mut s = serde_json::to_string_pretty(json).expect("JSON serializes");
    s.push('\n');
    s
}

/// Reads a spec file, builds its graph and loads its datasets.
pub fn load_spec(path: &Path, opts: &Options) -> Result<(KnowledgeGraph, Datasets), CliError> {
    let (mut spec, base) = SpecFile::read(path)?;
    if let Some(seed) = opts.seed {
        spec.apply_seed(seed);
    }
    let datasets = spec.load_datasets(&base, &opts.data)?;
    let graph = spec.build_graph()?;
    Ok((graph, datasets))
}

pub fn load(source: &Source, opts: &Options) -> Result<(KnowledgeGraph, Datasets), CliError> {
    match source {
        Source::Spec(path) => load_spec(path, opts),
        Source::Scenario(id) => {
            let s = scenarios::build(*id, &opts.data)?;
            Ok((s.graph, s.datasets))
        }
    }
}

fn result_summary(graph: &KnowledgeGraph, datasets: &Datasets, name: &str) -> Result<Json, CliError> {
    let content = graph.analytic(name)?;
    if content.has_wildcard() {
        return Ok(json!({ "kind": "template" }));
    }
    let result = graph
        .results(name, datasets)
        .map_err(|e| CliError::Semantic(format!("analytic node `{name}`: {e}")))?;
    Ok(match result.as_ref() {
        AnalyticResult::Table(t) => json!({
            "kind": "table",
            "rows": t.row_count(),
            "columns": t.schema().iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
            "head": t.to_json()["rows"].as_array().map(|rows| rows.iter().take(5).cloned().collect::<Vec<_>>()),
        }),
        AnalyticResult::Model { model, report, .. } => json!({
            "kind": "model",
            "parameters": model
                .parameters()
                .map(|p| p.into_iter().map(|(k, v)| (k, json!(v))).collect::<Map<_, _>>())
                .unwrap_or_default(),
            "report": report.to_json(),
        }),
    })
}

/// Builds the graph, executes every executable analytic node and prints the
/// graph document with statistics and per-node result summaries.
pub fn run(path: &Path, opts: &Options) -> Result<String, CliError> {
    let (graph, datasets) = load_spec(path, opts)?;
    let mut results = Map::new();
    for n in graph.nodes() {
        if n.as_analytic().is_some() {
            results.insert(n.name().to_string(), result_summary(&graph, &datasets, n.name())?);
        }
    }
    Ok(pretty(&json!({
        "graph": graph.to_json(),
        "stats": graph_stats(&graph),
        "results": results,
    })))
}

/// Builds a scenario, runs its golden checks and returns the report, whether
/// every check passed, and the graph document.
pub fn scenario(id: ScenarioId, opts: &Options) -> Result<(String, bool, String), CliError> {
    let s = scenarios::build(id, &opts.data)?;
    let checks = scenarios::check(&s);
    let passed = checks.iter().all(|c| c.passed);
    Ok((scenarios::report(id, &checks), passed, pretty(&s.graph.to_json())))
}

pub fn metrics(source: &Source, node: &str, opts: &Options) -> Result<String, CliError> {
    let (graph, datasets) = load(source, opts)?;
    let report = metric_report(&graph, node, &datasets)?;
    Ok(pretty(&serde_json::to_value(report).expect("report serializes")))
}

pub fn export(source: &Source, format: ExportFormat, target: Option<&str>, opts: &Options) -> Result<String, CliError> {
    let (graph, datasets) = load(source, opts)?;
    match (format, target) {
        (ExportFormat::Dot, None) => Ok(to_dot(&graph)),
        (ExportFormat::Dot, Some(_)) => Err(CliError::Parse("--target applies to csv export only".into())),
        (ExportFormat::Csv, Some(t)) => result_csv(&graph, &datasets, t),
        (ExportFormat::Csv, None) => Err(CliError::Parse("csv export needs --target <node>".into())),
    }
}

/// Sorted names of the fully specified insights satisfying `objective`, as
/// a JSON array, plus a warning when `objective` has no wildcard.
pub fn match_objective(source: &Source, objective: &str, opts: &Options) -> Result<(String, Option<String>), CliError> {
    let (graph, _) = load(source, opts)?;
    let names = graph.matching_insights(objective)?;
    let warning = (!graph.is_objective(objective)?)
        .then(|| format!("`{objective}` is fully specified; matching it as an exact query"));
    Ok((
        format!("{}\n", serde_json::to_string(&names).expect("names serialize")),
        warning,
    ))
}
