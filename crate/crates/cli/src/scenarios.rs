//! The four bundled scenarios: Baltimore crime peaks, movie length versus
//! popularity, monthly rents and bird strikes by weather.
//!
//! Each builds its graph programmatically over bundled CSV fixtures and is
//! checked against a hand-written golden file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use insightkit::insight::{Bindings, Members, TaskStatus};
use insightkit::knowledge::{AnalyticContent, AnalyticResult, KnowledgeGraph, Metadata};
use insightkit::metrics::{breadth, depth, graph_stats, validate};
use insightkit::relationships::{RelationshipKind, RelationshipModel};
use insightkit::tabular::{read_csv, Attribute, Record, Table, Value};
use insightkit::transforms::{
    Aggregate, AggregateExpr, BinSpec, Datasets, JoinKey, SortKey, TransformSpec, TransformStep,
};
use serde::Deserialize;

use crate::spec_file::load_named_csv;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum ScenarioId {
    Baltimore,
    Movies,
    Rents,
    Birdstrikes,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 4] = [
        ScenarioId::Baltimore,
        ScenarioId::Movies,
        ScenarioId::Rents,
        ScenarioId::Birdstrikes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Baltimore => "baltimore",
            ScenarioId::Movies => "movies",
            ScenarioId::Rents => "rents",
            ScenarioId::Birdstrikes => "birdstrikes",
        }
    }

    /// Bundled tables as `(dataset name, CSV text)`.
    pub fn fixtures(self) -> &'static [(&'static str, &'static str)] {
        match self {
            ScenarioId::Baltimore => &[("baltimoreCrime", include_str!("../fixtures/baltimore_crime.csv"))],
            ScenarioId::Movies => &[
                ("movies", include_str!("../fixtures/movies.csv")),
                ("oscars", include_str!("../fixtures/oscars.csv")),
            ],
            ScenarioId::Rents => &[("rents", include_str!("../fixtures/rents.csv"))],
            ScenarioId::Birdstrikes => &[("strikes", include_str!("../fixtures/birdstrikes.csv"))],
        }
    }

    pub fn golden_json(self) -> &'static str {
        match self {
            ScenarioId::Baltimore => include_str!("../fixtures/golden/baltimore.json"),
            ScenarioId::Movies => include_str!("../fixtures/golden/movies.json"),
            ScenarioId::Rents => include_str!("../fixtures/golden/rents.json"),
            ScenarioId::Birdstrikes => include_str!("../fixtures/golden/birdstrikes.json"),
        }
    }

    pub fn golden(self) -> Golden {
        serde_json::from_str(self.golden_json()).expect("bundled golden file parses")
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A built scenario graph with its datasets.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: ScenarioId,
    pub graph: KnowledgeGraph,
    pub datasets: Datasets,
    /// Task statuses recorded before their insights were attached.
    pub status_before: BTreeMap<String, TaskStatus>,
}

/// Loads the bundled tables, replacing any named in `overrides`.
pub fn scenario_datasets(id: ScenarioId, overrides: &[(String, PathBuf)]) -> Result<Datasets, CliError> {
    let mut datasets = Datasets::new();
    for (name, text) in id.fixtures() {
        if !overrides.iter().any(|(n, _)| n == name) {
            let table = read_csv(*name, text.as_bytes(), None).expect("bundled fixture parses");
            datasets.insert(table);
        }
    }
    for (name, path) in overrides {
        datasets.insert(load_named_csv(name, path, None)?);
    }
    Ok(datasets)
}

pub fn build(id: ScenarioId, overrides: &[(String, PathBuf)]) -> Result<Scenario, CliError> {
    let datasets = scenario_datasets(id, overrides)?;
    let mut status_before = BTreeMap::new();
    let graph = match id {
        ScenarioId::Baltimore => baltimore(),
        ScenarioId::Movies => movies(&mut status_before),
        ScenarioId::Rents => rents(),
        ScenarioId::Birdstrikes => birdstrikes(),
    }
    .map_err(|e| CliError::Semantic(format!("building scenario {id}: {e}")))?;
    Ok(Scenario {
        id,
        graph,
        datasets,
        status_before,
    })
}

fn step(result: Result<TransformStep, insightkit::transforms::TransformError>) -> TransformStep {
    result.expect("scenario expression parses")
}

/// Adds every existing member of an insight as one of its sources.
fn link_insight(g: &mut KnowledgeGraph, insight: &str) -> Result<(), CliError> {
    let content = g.insight(insight)?.clone();
    for m in content.domain.names().iter().chain(content.analytic.names()) {
        if g.contains(m) {
            g.add_source(insight, m)?;
        }
    }
    Ok(())
}

/// Adds a task's objective and insights as its sources.
fn link_task(g: &mut KnowledgeGraph, task: &str) -> Result<(), CliError> {
    let content = g.task(task)?.clone();
    g.add_source(task, &content.objective)?;
    for i in &content.insights {
        g.add_source(task, i)?;
    }
    Ok(())
}

const BALTIMORE_TIME: u64 = 1_430_092_800_000;

fn baltimore() -> Result<KnowledgeGraph, CliError> {
    let mut g = KnowledgeGraph::new();
    g.create_concept("Crime", &[])?;
    g.create_concept("Protest", &[])?;
    let link = Attribute::nominal("link");
    g.create_instance(
        "WikipediaArticle-2015BaltimoreProtests",
        "Protest",
        Metadata::new().with(
            link,
            Value::text("https://en.wikipedia.org/wiki/2015_Baltimore_protests"),
        ),
    )?;
    g.create_domain_node("2015BaltimoreProtests", "WikipediaArticle-2015BaltimoreProtests", None)?;

    let top_days = TransformSpec::new(
        &["baltimoreCrime"],
        vec![
            TransformStep::groupby(&["CrimeDate"]),
            TransformStep::count("count"),
            TransformStep::orderby(vec![SortKey::desc("count")]),
            step(TransformStep::filter("rank() <= 3")),
        ],
    );
    g.create_analytic_node(
        "peakCrimes",
        AnalyticContent::transform(BALTIMORE_TIME, top_days),
        Some("top 3 days of reported crimes"),
    )?;
    let tree = RelationshipModel::new(
        "predictCrimeType",
        RelationshipKind::DecisionTreeClassification,
        &["Inside/Outside", "Premise"],
        Some("Description"),
    );
    g.create_analytic_node(
        "predictCrimeType",
        AnalyticContent::relationship(BALTIMORE_TIME, tree, "baltimoreCrime"),
        Some("whether location is indicative of crime type"),
    )?;

    g.create_insight(
        "johnsInsight",
        Members::list(&["2015BaltimoreProtests"]),
        Members::list(&["peakCrimes"]),
        Some("Peak Crime = Freddy Grey's Funeral"),
    )?;
    g.create_insight(
        "protestsObjective",
        Members::list(&["2015BaltimoreProtests"]),
        Members::Wildcard,
        Some("How did Freddy Gray's funeral impact Baltimore crime?"),
    )?;
    g.create_insight(
        "aprilCrimeObjective",
        Members::Wildcard,
        Members::list(&["peakCrimes"]),
        Some("What happened on April 27, 2015 that may have led to more crime?"),
    )?;
    g.create_task("protestsTask", "protestsObjective", &["johnsInsight"], None)?;
    for insight in ["johnsInsight", "protestsObjective", "aprilCrimeObjective"] {
        link_insight(&mut g, insight)?;
    }
    link_task(&mut g, "protestsTask")?;
    Ok(g)
}

const MOVIES_TIME: u64 = 1_104_537_600_000;

fn award_winners() -> TransformSpec {
    TransformSpec::new(
        &["movies", "oscars"],
        vec![
            TransformStep::Join {
                right: "oscars".into(),
                on: vec![JoinKey {
                    left: "title".into(),
                    right: "film".into(),
                }],
            },
            step(TransformStep::filter("year >= 2002")),
            TransformStep::orderby(vec![SortKey::asc("year")]),
        ],
    )
}

fn movies(status_before: &mut BTreeMap<String, TaskStatus>) -> Result<KnowledgeGraph, CliError> {
    let mut g = KnowledgeGraph::new();
    g.create_concept("Quality", &[])?;
    g.create_instance(
        "FilmLengthArticle",
        "Quality",
        Metadata::new().with(
            Attribute::nominal("topic"),
            Value::text("effect of film length on popularity"),
        ),
    )?;
    g.create_domain_node("filmLengthNode", "FilmLengthArticle", None)?;

    // the task starts with an objective and no insights
    g.create_insight(
        "moviesObjective",
        Members::list(&["filmLengthNode"]),
        Members::Wildcard,
        Some("understanding trends in movie popularity over time"),
    )?;
    g.create_task("moviesTask", "moviesObjective", &[], None)?;
    link_insight(&mut g, "moviesObjective")?;
    link_task(&mut g, "moviesTask")?;
    status_before.insert("moviesTask".into(), g.task_status("moviesTask")?);

    g.create_analytic_node(
        "awardWinners",
        AnalyticContent::transform(MOVIES_TIME, award_winners()),
        Some("Academy Award winners of the last ten years"),
    )?;
    let regression = RelationshipModel::new(
        "lengthVsRating",
        RelationshipKind::LinearRegression,
        &["length"],
        Some("rating"),
    );
    g.create_analytic_node(
        "lengthVsRating",
        AnalyticContent::pipeline_model(MOVIES_TIME, award_winners(), regression),
        Some("correlation between length and popularity among award winners"),
    )?;
    g.add_target("awardWinners", "lengthVsRating")?;

    g.complete(
        "moviesObjective",
        &Bindings::analytic(&["awardWinners", "lengthVsRating"]),
        "moviesInsight",
    )?;
    link_insight(&mut g, "moviesInsight")?;
    g.attach_insight("moviesTask", "moviesInsight")?;
    g.add_target("moviesInsight", "moviesTask")?;
    Ok(g)
}

const RENTS_TIME: u64 = 1_136_073_600_000;

fn rents() -> Result<KnowledgeGraph, CliError> {
    let mut g = KnowledgeGraph::new();
    let minmax = TransformSpec::new(
        &["rents"],
        vec![TransformStep::rollup(vec![
            Aggregate::new("min", AggregateExpr::Min("rent".into())),
            Aggregate::new("max", AggregateExpr::Max("rent".into())),
        ])],
    );
    g.create_analytic_node(
        "minmax",
        AnalyticContent::transform(RENTS_TIME, minmax),
        Some("minimum and maximum rent"),
    )?;
    let normal = RelationshipModel::new("normalFit", RelationshipKind::NormalDistribution, &["rent"], None);
    g.create_analytic_node(
        "normalFit",
        AnalyticContent::relationship(RENTS_TIME, normal, "rents"),
        Some("normal distribution over rents"),
    )?;
    let histogram = TransformSpec::new(
        &["rents"],
        vec![
            TransformStep::Bin {
                attribute: "rent".into(),
                bins: BinSpec::Count(5),
                name: "bin".into(),
            },
            TransformStep::groupby(&["bin_start", "bin_end"]),
            TransformStep::count("count"),
            TransformStep::orderby(vec![SortKey::asc("bin_start")]),
        ],
    );
    g.create_analytic_node(
        "histogram",
        AnalyticContent::transform(RENTS_TIME, histogram),
        Some("shape of the rent distribution"),
    )?;
    Ok(g)
}

const STRIKES_TIME: u64 = 1_546_300_800_000;

/// Yearly incident counts per value of `attribute`; `*` gives the template.
pub fn strikes_pipeline(attribute: &str) -> TransformSpec {
    TransformSpec::new(
        &["strikes"],
        vec![
            step(TransformStep::filter(&format!("isValid({attribute})"))),
            step(TransformStep::derive("year", "year(incident_date)")),
            TransformStep::groupby(&["year", attribute]),
            TransformStep::count("count"),
            TransformStep::orderby(vec![SortKey::asc("year")]),
        ],
    )
}

fn birdstrikes() -> Result<KnowledgeGraph, CliError> {
    let mut g = KnowledgeGraph::new();
    g.create_concept("Weather", &[])?;
    let question = "What relationships (if any) do you observe involving weather conditions and strike frequency, or counts over time?";
    g.create_instance(
        "WildlifeStrikesT3",
        "Weather",
        Metadata::new().with(Attribute::nominal("question"), Value::text(question)),
    )?;
    g.create_domain_node("weatherNode", "WildlifeStrikesT3", None)?;
    g.create_analytic_node(
        "precipNode",
        AnalyticContent::transform(STRIKES_TIME, strikes_pipeline("precip")),
        Some("strikes do not increase with time, except in rain"),
    )?;
    g.create_analytic_node(
        "skyNode",
        AnalyticContent::transform(STRIKES_TIME, strikes_pipeline("sky")),
        Some("strikes increase with time under every sky condition"),
    )?;
    g.add_related("precipNode", "skyNode")?;
    g.create_analytic_node(
        "weatherTrend",
        AnalyticContent::transform(STRIKES_TIME, strikes_pipeline("*")),
        Some("yearly counts by some weather attribute"),
    )?;
    g.create_insight(
        "t3Objective",
        Members::list(&["weatherNode"]),
        Members::list(&["weatherTrend"]),
        Some(question),
    )?;
    link_insight(&mut g, "t3Objective")?;
    for (insight, node, task) in [
        ("precipInsight", "precipNode", "precipTask"),
        ("skyInsight", "skyNode", "skyTask"),
    ] {
        let mut bindings = Bindings::default();
        bindings.members.insert("weatherTrend".into(), node.into());
        g.complete("t3Objective", &bindings, insight)?;
        link_insight(&mut g, insight)?;
        g.create_task(task, "t3Objective", &[insight], None)?;
        link_task(&mut g, task)?;
    }
    Ok(g)
}

/// Least-squares slope of yearly counts for each value of `attribute` in a
/// `(year, attribute, count)` table, each fitted by its own regression.
pub fn trend_slopes(table: &Table, attribute: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut groups: BTreeMap<String, Vec<Record>> = BTreeMap::new();
    for record in table.records() {
        let key = record
            .get(attribute)
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        groups.entry(key).or_default().push(record);
    }
    let mut out = BTreeMap::new();
    for (condition, rows) in groups {
        let model = RelationshipModel::new(
            format!("{condition} trend"),
            RelationshipKind::LinearRegression,
            &["year"],
            Some("count"),
        )
        .train(&rows)
        .map_err(|e| CliError::Semantic(format!("trend for `{condition}`: {e}")))?;
        let slope = model
            .parameters()
            .map_err(|e| CliError::Semantic(e.to_string()))?
            .into_iter()
            .find(|(name, _)| name == "year")
            .map(|(_, v)| v)
            .expect("regression reports its coefficient");
        out.insert(condition, slope);
    }
    Ok(out)
}

/// Hand-derived expectations for a scenario.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Golden {
    pub census: Census,
    /// Source/target edges, as `[from, to]`.
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub related: Vec<[String; 2]>,
    #[serde(default)]
    pub task_status: BTreeMap<String, TaskStatus>,
    #[serde(default)]
    pub status_before: BTreeMap<String, TaskStatus>,
    #[serde(default)]
    pub depth: BTreeMap<String, usize>,
    #[serde(default)]
    pub matches: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub tables: BTreeMap<String, GoldenTable>,
    #[serde(default)]
    pub row_counts: BTreeMap<String, usize>,
    #[serde(default)]
    pub training_rows: BTreeMap<String, usize>,
    #[serde(default)]
    pub accuracy: BTreeMap<String, f64>,
    #[serde(default)]
    pub breadth: BTreeMap<String, f64>,
    /// Pairs `[a, b]` with breadth(a) < breadth(b).
    #[serde(default)]
    pub breadth_order: Vec<[String; 2]>,
    /// Node, then grouping attribute, then expected slope per value.
    #[serde(default)]
    pub slopes: BTreeMap<String, SlopeGolden>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Census {
    pub concepts: usize,
    pub instances: usize,
    pub domain_nodes: usize,
    pub analytic_nodes: usize,
    pub insights: usize,
    pub objectives: usize,
    pub tasks: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<serde_json::Value>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeGolden {
    pub attribute: String,
    pub expected: BTreeMap<String, f64>,
    /// The only values whose slope is positive; every other slope must be
    /// non-positive. Absent when every slope must be positive.
    #[serde(default)]
    pub rising: Option<Vec<String>>,
    #[serde(rename = "minMagnitude")]
    pub min_magnitude: f64,
}

/// Outcome of one golden check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, outcome: Result<String, String>) -> Self {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

const TOLERANCE: f64 = 1e-9;

fn compare<T: PartialEq + fmt::Debug>(got: T, want: T) -> Result<String, String> {
    if got == want {
        Ok(format!("{got:?}"))
    } else {
        Err(format!("got {got:?}, expected {want:?}"))
    }
}

fn close(got: f64, want: f64) -> Result<String, String> {
    if (got - want).abs() <= TOLERANCE * want.abs().max(1.0) {
        Ok(format!("{got}"))
    } else {
        Err(format!("got {got}, expected {want}"))
    }
}

fn table_of(s: &Scenario, node: &str) -> Result<Table, String> {
    let result = s.graph.results(node, &s.datasets).map_err(|e| e.to_string())?;
    result
        .table()
        .cloned()
        .ok_or_else(|| format!("`{node}` has no result table"))
}

fn check_table(s: &Scenario, node: &str, want: &GoldenTable) -> Result<String, String> {
    let table = table_of(s, node)?;
    let columns: Vec<&str> = table.schema().iter().map(|a| a.name.as_str()).collect();
    if columns != want.columns {
        return Err(format!("columns {columns:?}, expected {:?}", want.columns));
    }
    if table.row_count() != want.rows.len() {
        return Err(format!("{} rows, expected {}", table.row_count(), want.rows.len()));
    }
    for (i, (row, expected)) in table.rows().iter().zip(&want.rows).enumerate() {
        for ((got, json), attr) in row.iter().zip(expected).zip(table.schema()) {
            let want = Value::from_json(json, attr).map_err(|e| format!("golden row {i}: {e}"))?;
            if *got != want {
                return Err(format!("row {i} `{}`: got {got:?}, expected {want:?}", attr.name));
            }
        }
    }
    Ok(format!("{} rows", table.row_count()))
}

fn check_slopes(s: &Scenario, node: &str, want: &SlopeGolden) -> Result<String, String> {
    let table = table_of(s, node)?;
    let slopes = trend_slopes(&table, &want.attribute).map_err(|e| e.to_string())?;
    let got: Vec<&String> = slopes.keys().collect();
    let expected: Vec<&String> = want.expected.keys().collect();
    if got != expected {
        return Err(format!("conditions {got:?}, expected {expected:?}"));
    }
    for (condition, &slope) in &slopes {
        close(slope, want.expected[condition]).map_err(|e| format!("`{condition}`: {e}"))?;
        let rising = want.rising.as_ref().is_none_or(|r| r.contains(condition));
        if rising && slope <= 0.0 || !rising && slope > 0.0 {
            return Err(format!("`{condition}` slope {slope} has the wrong sign"));
        }
        if slope.abs() < want.min_magnitude {
            return Err(format!("`{condition}` slope {slope} is below {}", want.min_magnitude));
        }
    }
    let listed: Vec<String> = slopes.iter().map(|(c, v)| format!("{c} {v:+.3}")).collect();
    Ok(listed.join(", "))
}

/// Runs every golden check for the scenario.
pub fn check(s: &Scenario) -> Vec<Check> {
    let golden = s.id.golden();
    let g = &s.graph;
    let mut checks = Vec::new();

    let stats = graph_stats(g);
    let census = Census {
        concepts: stats.concepts,
        instances: stats.instances,
        domain_nodes: stats.domain_nodes,
        analytic_nodes: stats.analytic_nodes,
        insights: stats.insights,
        objectives: stats.objectives,
        tasks: stats.tasks,
    };
    checks.push(Check::new("census", compare(census, golden.census.clone())));
    let violations = validate(g);
    checks.push(Check::new(
        "validation",
        if violations.is_empty() {
            Ok("no violations".into())
        } else {
            Err(violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; "))
        },
    ));

    let mut edges: Vec<[String; 2]> = g
        .nodes()
        .flat_map(|n| n.core.targets.iter().map(|t| [n.name().to_string(), t.clone()]))
        .collect();
    edges.sort();
    let mut want = golden.edges.clone();
    want.sort();
    checks.push(Check::new(
        "edges",
        compare(edges, want).map(|_| format!("{} source/target edges", golden.edges.len())),
    ));
    let mut related: Vec<[String; 2]> = g
        .nodes()
        .flat_map(|n| {
            n.core
                .related
                .iter()
                .filter(|r| n.name() < r.as_str())
                .map(|r| [n.name().to_string(), r.clone()])
        })
        .collect();
    related.sort();
    let mut want = golden.related.clone();
    want.sort();
    checks.push(Check::new("related edges", compare(related, want)));

    for (task, status) in &golden.status_before {
        checks.push(Check::new(
            format!("{task} before completion"),
            compare(s.status_before.get(task).copied(), Some(*status)),
        ));
    }
    for (task, status) in &golden.task_status {
        checks.push(Check::new(
            format!("{task} status"),
            g.task_status(task)
                .map_err(|e| e.to_string())
                .and_then(|got| compare(got, *status)),
        ));
    }
    for (node, d) in &golden.depth {
        checks.push(Check::new(
            format!("depth({node})"),
            depth(g, node)
                .map_err(|e| e.to_string())
                .and_then(|got| compare(got, *d)),
        ));
    }
    for (objective, names) in &golden.matches {
        checks.push(Check::new(
            format!("match {objective}"),
            g.matching_insights(objective)
                .map_err(|e| e.to_string())
                .and_then(|got| compare(got, names.clone())),
        ));
    }
    for (node, table) in &golden.tables {
        checks.push(Check::new(format!("{node} table"), check_table(s, node, table)));
    }
    for (node, rows) in &golden.row_counts {
        checks.push(Check::new(
            format!("{node} rows"),
            table_of(s, node).and_then(|t| compare(t.row_count(), *rows)),
        ));
    }
    for (node, rows) in &golden.training_rows {
        let got = g
            .results(node, &s.datasets)
            .map_err(|e| e.to_string())
            .and_then(|r| match r.as_ref() {
                AnalyticResult::Model { model, .. } => Ok(model.training_rows()),
                _ => Err(format!("`{node}` is not a model node")),
            });
        checks.push(Check::new(
            format!("{node} training rows"),
            got.and_then(|got| compare(got, Some(*rows))),
        ));
    }
    for (node, accuracy) in &golden.accuracy {
        let got = g.results(node, &s.datasets).map_err(|e| e.to_string()).and_then(|r| {
            r.report()
                .and_then(|rep| rep.accuracy())
                .ok_or_else(|| format!("`{node}` has no accuracy"))
        });
        checks.push(Check::new(
            format!("{node} accuracy"),
            got.and_then(|got| close(got, *accuracy)),
        ));
    }
    for (node, b) in &golden.breadth {
        checks.push(Check::new(
            format!("breadth({node})"),
            breadth(g, node, &s.datasets)
                .map_err(|e| e.to_string())
                .and_then(|got| close(got, *b)),
        ));
    }
    for [a, b] in &golden.breadth_order {
        let outcome = match (breadth(g, a, &s.datasets), breadth(g, b, &s.datasets)) {
            (Ok(x), Ok(y)) if x < y => Ok(format!("{x} < {y}")),
            (Ok(x), Ok(y)) => Err(format!("{x} is not below {y}")),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        };
        checks.push(Check::new(format!("breadth({a}) < breadth({b})"), outcome));
    }
    for (node, want) in &golden.slopes {
        checks.push(Check::new(format!("{node} trends"), check_slopes(s, node, want)));
    }
    checks
}

/// One line per check, then a summary line.
pub fn report(id: ScenarioId, checks: &[Check]) -> String {
    let mut out = format!("scenario {id}\n");
    for c in checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{mark} {}: {}\n", c.name, c.detail));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    out
}
