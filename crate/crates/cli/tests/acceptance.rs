//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use insightkit::insight::TaskStatus;
use insightkit::knowledge::{AnalyticResult, KnowledgeGraph};
use insightkit::metrics::{breadth, depth, graph_stats, validate};
use insightkit::relationships::{Hyperparameters, RelationshipKind, RelationshipModel, SplitRule};
use insightkit::tabular::{read_csv, write_csv_string, Record, Value};
use insightkit_cli::commands::{load_spec, Options};
use insightkit_cli::export::to_dot;
use insightkit_cli::scenarios::{self, ScenarioId};
use insightkit_oracles::harness::{depth_case, graph_fuzz, transform_case, widening_case};
use insightkit_oracles::models::{
    best_split, exhaustive_splits, knn_vote, normal_equations, ols_slope, trapezoid, Column,
};
use insightkit_oracles::{dot, graph::audit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rec(pairs: Vec<(&str, Value)>) -> Record {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn baltimore_census() -> Outcome {
    let s = scenarios::build(ScenarioId::Baltimore, &[]).map_err(|e| e.to_string())?;
    let st = graph_stats(&s.graph);
    let census = [
        st.concepts,
        st.instances,
        st.domain_nodes,
        st.analytic_nodes,
        st.insights,
        st.objectives,
        st.tasks,
    ];
    ensure(census == [2, 1, 1, 2, 1, 2, 1], || format!("census {census:?}"))?;
    let status = s.graph.task_status("protestsTask").map_err(|e| e.to_string())?;
    ensure(status == TaskStatus::Satisfied, || {
        format!("protestsTask is {status:?}")
    })?;
    let violations = validate(&s.graph);
    ensure(violations.is_empty(), || format!("violations {violations:?}"))?;
    Ok("census 2/1/1/2/1/2/1, protestsTask satisfied, 0 violations".into())
}

fn rents_metrics() -> Outcome {
    let s = scenarios::build(ScenarioId::Rents, &[]).map_err(|e| e.to_string())?;
    let mut b = BTreeMap::new();
    for name in ["minmax", "normalFit", "histogram"] {
        let d = depth(&s.graph, name).map_err(|e| e.to_string())?;
        ensure(d == 1, || format!("depth({name}) = {d}"))?;
        b.insert(name, breadth(&s.graph, name, &s.datasets).map_err(|e| e.to_string())?);
    }
    ensure(b["minmax"] < b["histogram"] && b["normalFit"] < b["histogram"], || {
        format!("breadth {b:?}")
    })?;
    Ok(format!(
        "depth 1 for all three; breadth minmax {:.4}, normalFit {:.4} < histogram {:.4}",
        b["minmax"], b["normalFit"], b["histogram"]
    ))
}

/// Yearly counts per condition, counted straight from the CSV text.
fn raw_counts(csv: &str, column: usize) -> BTreeMap<String, BTreeMap<i32, usize>> {
    let mut out: BTreeMap<String, BTreeMap<i32, usize>> = BTreeMap::new();
    for line in csv.lines().skip(1).filter(|l| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        let condition = fields[column].trim();
        if condition.is_empty() {
            continue;
        }
        let year: i32 = fields[0][..4].parse().expect("year prefix");
        *out.entry(condition.to_string()).or_default().entry(year).or_default() += 1;
    }
    out
}

fn birdstrike_trends() -> Outcome {
    let s = scenarios::build(ScenarioId::Birdstrikes, &[]).map_err(|e| e.to_string())?;
    let csv = ScenarioId::Birdstrikes.fixtures()[0].1;
    let mut lines = Vec::new();
    for (node, attribute, column) in [("precipNode", "precip", 1), ("skyNode", "sky", 2)] {
        let table = match s.graph.results(node, &s.datasets).map_err(|e| e.to_string())?.as_ref() {
            AnalyticResult::Table(t) => t.clone(),
            AnalyticResult::Model { .. } => return Err(format!("{node} is not a table node")),
        };
        let engine = scenarios::trend_slopes(&table, attribute).map_err(|e| e.to_string())?;
        let counts = raw_counts(csv, column);
        ensure(engine.keys().eq(counts.keys()), || {
            format!("{node} conditions {:?} vs {:?}", engine.keys(), counts.keys())
        })?;
        for (condition, by_year) in &counts {
            let xs: Vec<f64> = by_year.keys().map(|&y| y as f64).collect();
            let ys: Vec<f64> = by_year.values().map(|&c| c as f64).collect();
            let want = ols_slope(&xs, &ys);
            let got = engine[condition];
            ensure((got - want).abs() <= 1e-9 * want.abs().max(1.0), || {
                format!("{node}/{condition}: engine {got}, oracle {want}")
            })?;
            ensure(got.abs() >= 0.5, || format!("{node}/{condition}: |slope| {got} < 0.5"))?;
            let rising = attribute == "sky" || condition == "rain";
            ensure(if rising { got > 0.0 } else { got <= 0.0 }, || {
                format!("{node}/{condition}: slope {got} has the wrong sign")
            })?;
            lines.push(format!("{condition} {got:+.2}"));
        }
    }
    Ok(format!("slopes {}", lines.join(", ")))
}

fn transform_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for case in 0..200 {
        transform_case(&mut rng, 100, 6).map_err(|e| format!("case {case}: {e}"))?;
    }
    Ok("200 random tables equal the reference operators".into())
}

fn linear_regression_cases(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..100 {
        let p = rng.random_range(1..=4);
        let n = rng.random_range(p + 3..40);
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| x.iter().enumerate().map(|(j, v)| (j as f64 - 1.5) * v).sum::<f64>() + rng.random_range(-2.0..2.0))
            .collect();
        let names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
        let inputs: Vec<&str> = names.iter().map(String::as_str).collect();
        let rows: Vec<Record> = xs
            .iter()
            .zip(&ys)
            .map(|(x, &y)| {
                let mut r: Record = names.iter().cloned().zip(x.iter().map(|&v| Value::Number(v))).collect();
                r.insert("y".into(), Value::Number(y));
                r
            })
            .collect();
        let model = RelationshipModel::new("lr", RelationshipKind::LinearRegression, &inputs, Some("y"))
            .train(&rows)
            .map_err(|e| format!("regression {case}: {e}"))?;
        let fitted: Vec<f64> = model
            .parameters()
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        let expected = normal_equations(&xs, &ys);
        for (f, e) in fitted.iter().zip(&expected) {
            ensure((f - e).abs() <= 1e-9 * e.abs().max(1.0), || {
                format!("regression {case}: {f} vs {e}")
            })?;
        }
    }
    Ok(())
}

fn tree_cases(rng: &mut ChaCha8Rng) -> Result<(), String> {
    const CATS: [&str; 3] = ["p", "q", "r"];
    const LABELS: [&str; 3] = ["A", "B", "C"];
    let mut case = 0;
    while case < 50 {
        let n = rng.random_range(4..50);
        let nums: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
        let cats: Vec<&str> = (0..n).map(|_| CATS[rng.random_range(0..3)]).collect();
        let labels: Vec<&str> = (0..n).map(|_| LABELS[rng.random_range(0..3)]).collect();
        if labels.iter().all(|l| *l == labels[0]) {
            continue;
        }
        let rows: Vec<Record> = (0..n)
            .map(|i| {
                rec(vec![
                    ("num", Value::Number(nums[i])),
                    ("cat", Value::text(cats[i])),
                    ("label", Value::text(labels[i])),
                ])
            })
            .collect();
        let model = RelationshipModel::new(
            "dt",
            RelationshipKind::DecisionTreeClassification,
            &["num", "cat"],
            Some("label"),
        )
        .train(&rows)
        .map_err(|e| format!("tree {case}: {e}"))?;
        let candidates = exhaustive_splits(&[Column::Num("num", &nums), Column::Cat("cat", &cats)], &labels);
        match (
            model.root_split().map_err(|e| e.to_string())?,
            best_split(&candidates, 1e-12),
        ) {
            (None, None) => {}
            (Some(split), Some(best)) => {
                let rule = match &best.rule {
                    Ok(t) => SplitRule::AtMost(*t),
                    Err(c) => SplitRule::Equals(Value::text(c.as_str())),
                };
                ensure(split.attribute == best.attribute && split.rule == rule, || {
                    format!("tree {case}: {split:?} vs {best:?}")
                })?;
                ensure((split.impurity - best.impurity).abs() < 1e-12, || {
                    format!("tree {case}: impurity")
                })?;
            }
            (got, want) => return Err(format!("tree {case}: split {got:?}, oracle {want:?}")),
        }
        case += 1;
    }
    Ok(())
}

fn knn_cases(rng: &mut ChaCha8Rng) -> Result<(), String> {
    const CATS: [&str; 2] = ["m", "n"];
    const LABELS: [&str; 3] = ["x", "y", "z"];
    let mut case = 0;
    while case < 100 {
        let n = rng.random_range(3..30);
        let data: Vec<(f64, f64, usize, usize)> = (0..n)
            .map(|_| {
                (
                    rng.random_range(-5.0..5.0),
                    rng.random_range(0.0..100.0),
                    rng.random_range(0..2),
                    rng.random_range(0..3),
                )
            })
            .collect();
        if data.iter().all(|d| d.3 == data[0].3) {
            continue;
        }
        let probe = (
            rng.random_range(-5.0..5.0),
            rng.random_range(0.0..100.0),
            rng.random_range(0..2),
        );
        let k = rng.random_range(1..6);
        let rows: Vec<Record> = data
            .iter()
            .map(|d| {
                rec(vec![
                    ("a", Value::Number(d.0)),
                    ("b", Value::Number(d.1)),
                    ("c", Value::text(CATS[d.2])),
                    ("label", Value::text(LABELS[d.3])),
                ])
            })
            .collect();
        let model = RelationshipModel::new(
            "knn",
            RelationshipKind::KnnClassification,
            &["a", "b", "c"],
            Some("label"),
        )
        .with_hyperparameters(Hyperparameters {
            k: Some(k),
            ..Default::default()
        })
        .train(&rows)
        .map_err(|e| format!("knn {case}: {e}"))?;
        let got = model
            .predict(&rec(vec![
                ("a", Value::Number(probe.0)),
                ("b", Value::Number(probe.1)),
                ("c", Value::text(CATS[probe.2])),
            ]))
            .map_err(|e| e.to_string())?;
        let m = n as f64;
        let z = |col: fn(&(f64, f64, usize, usize)) -> f64| {
            let mean = data.iter().map(col).sum::<f64>() / m;
            let std = (data.iter().map(|d| (col(d) - mean).powi(2)).sum::<f64>() / m).sqrt();
            (mean, if std == 0.0 { 1.0 } else { std })
        };
        let (ma, sa) = z(|d| d.0);
        let (mb, sb) = z(|d| d.1);
        let dist: Vec<f64> = data
            .iter()
            .map(|d| {
                let e = (((d.0 - ma) / sa - (probe.0 - ma) / sa).powi(2)
                    + ((d.1 - mb) / sb - (probe.1 - mb) / sb).powi(2))
                .sqrt();
                e + if d.2 == probe.2 { 0.0 } else { 1.0 }
            })
            .collect();
        let labels: Vec<&str> = data.iter().map(|d| LABELS[d.3]).collect();
        let want = knn_vote(&dist, &labels, k);
        ensure(got == Value::text(want), || format!("knn {case}: {got:?} vs {want}"))?;
        case += 1;
    }
    Ok(())
}

fn bayes_cases(rng: &mut ChaCha8Rng) -> Result<(), String> {
    const CATS: [&str; 4] = ["a", "b", "c", "unseen"];
    let mut case = 0;
    while case < 100 {
        let n = rng.random_range(4..40);
        let data: Vec<(usize, f64, bool)> = (0..n)
            .map(|_| {
                (
                    rng.random_range(0..3),
                    rng.random_range(-10.0..10.0),
                    rng.random_bool(0.5),
                )
            })
            .collect();
        if data.iter().all(|d| d.2 == data[0].2) {
            continue;
        }
        let rows: Vec<Record> = data
            .iter()
            .map(|d| {
                rec(vec![
                    ("c", Value::text(CATS[d.0])),
                    ("x", Value::Number(d.1)),
                    ("y", Value::text(if d.2 { "yes" } else { "no" })),
                ])
            })
            .collect();
        let model = RelationshipModel::new("nb", RelationshipKind::NaiveBayesClassification, &["c", "x"], Some("y"))
            .train(&rows)
            .map_err(|e| format!("bayes {case}: {e}"))?;
        let probe = rec(vec![
            ("c", Value::text(CATS[rng.random_range(0..4)])),
            ("x", Value::Number(rng.random_range(-20.0..20.0))),
        ]);
        let total: f64 = model
            .predict_proba(&probe)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|p| p.1)
            .sum();
        ensure((total - 1.0).abs() < 1e-12, || {
            format!("bayes {case}: posteriors sum to {total}")
        })?;
        case += 1;
    }
    Ok(())
}

fn kde_cases(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..30 {
        let n = rng.random_range(1..30);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let rows: Vec<Record> = values.iter().map(|&v| rec(vec![("v", Value::Number(v))])).collect();
        let model = RelationshipModel::new("kde", RelationshipKind::KernelDensity, &["v"], None)
            .train(&rows)
            .map_err(|e| format!("kde {case}: {e}"))?;
        let h = model.parameters().map_err(|e| e.to_string())?[0].1;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - 6.0 * h;
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 6.0 * h;
        let integral = trapezoid(|x| model.score_value(x).expect("density"), lo, hi, 20_000);
        ensure((integral - 1.0).abs() < 1e-3, || {
            format!("kde {case}: integral {integral}")
        })?;
    }
    Ok(())
}

fn forest_cases(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..20 {
        let mut rows: Vec<Record> = (0..200)
            .map(|_| {
                rec(vec![
                    ("x", Value::Number(rng.random_range(0.0..1.0))),
                    ("y", Value::Number(rng.random_range(0.0..1.0))),
                ])
            })
            .collect();
        let outlier = rec(vec![("x", Value::Number(25.0)), ("y", Value::Number(-25.0))]);
        rows.push(outlier.clone());
        let model = RelationshipModel::new("iso", RelationshipKind::IsolationForest, &["x", "y"], None)
            .with_hyperparameters(Hyperparameters {
                seed: Some(rng.random()),
                ..Default::default()
            })
            .train(&rows)
            .map_err(|e| format!("forest {case}: {e}"))?;
        let top = model.score(&outlier).map_err(|e| e.to_string())?;
        for r in &rows[..200] {
            let s = model.score(r).map_err(|e| e.to_string())?;
            ensure(s > 0.0 && s < 1.0, || {
                format!("forest {case}: score {s} outside (0, 1)")
            })?;
            ensure(s < top, || format!("forest {case}: inlier {s} >= outlier {top}"))?;
        }
        ensure(top > 0.0 && top < 1.0, || format!("forest {case}: outlier score {top}"))?;
    }
    Ok(())
}

fn relationship_models() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    linear_regression_cases(&mut rng)?;
    tree_cases(&mut rng)?;
    knn_cases(&mut rng)?;
    bayes_cases(&mut rng)?;
    kde_cases(&mut rng)?;
    forest_cases(&mut rng)?;
    Ok("regression 100, tree 50, knn 100, bayes 100, kde 30, forest 20 cases".into())
}

fn wildcard_semantics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut satisfied = 0;
    for case in 0..1000 {
        satisfied += usize::from(
            widening_case(&mut rng, case)
                .map_err(|e| format!("case {case}: {e}"))?
                .satisfied_before,
        );
    }
    let s = scenarios::build(ScenarioId::Baltimore, &[]).map_err(|e| e.to_string())?;
    for objective in ["protestsObjective", "aprilCrimeObjective"] {
        let ok = s
            .graph
            .satisfies("johnsInsight", objective)
            .map_err(|e| e.to_string())?;
        ensure(ok, || format!("johnsInsight does not satisfy {objective}"))?;
    }
    Ok(format!(
        "1000 widening cases ({satisfied} satisfied before widening); johnsInsight satisfies both objectives"
    ))
}

fn graph_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let summary = graph_fuzz(&mut rng, 10_000, 200)?;
    let mut nodes = 0;
    for _ in 0..300 {
        nodes += depth_case(&mut rng, 12)?;
    }
    Ok(format!(
        "{} of {} operations accepted, invariants held; depth checked on 300 graphs ({nodes} nodes)",
        summary.accepted, summary.attempted
    ))
}

fn spec_path(id: ScenarioId) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/specs")
        .join(format!("{}.json", id.as_str()))
}

fn round_trips() -> Outcome {
    let (mut tables, mut dots) = (0, 0);
    for id in ScenarioId::ALL {
        let (graph, datasets) = load_spec(&spec_path(id), &Options::default()).map_err(|e| e.to_string())?;
        let text = graph.to_json().to_string();
        let again = KnowledgeGraph::from_json_str(&text).map_err(|e| format!("{}: {e}", id.as_str()))?;
        ensure(graph_stats(&graph) == graph_stats(&again), || {
            format!("{}: stats differ after round trip", id.as_str())
        })?;
        let violations = validate(&again);
        ensure(violations.is_empty(), || format!("{}: {violations:?}", id.as_str()))?;
        let problems = audit(&again);
        ensure(problems.is_empty(), || format!("{}: {problems:?}", id.as_str()))?;

        let parsed = dot::parse(&to_dot(&again)).map_err(|e| format!("{}: DOT {e}", id.as_str()))?;
        let st = graph_stats(&again);
        ensure(parsed.edges.len() == st.source_target_edges + st.related_edges, || {
            format!("{}: DOT edge count", id.as_str())
        })?;
        dots += 1;

        for node in graph.nodes().filter(|n| n.as_analytic().is_some()) {
            if graph.analytic(node.name()).map_err(|e| e.to_string())?.has_wildcard() {
                continue;
            }
            let result = graph.results(node.name(), &datasets).map_err(|e| e.to_string())?;
            let table = match result.as_ref() {
                AnalyticResult::Table(t) => t,
                AnalyticResult::Model { training, .. } => training,
            };
            let csv = write_csv_string(table);
            let back = read_csv(node.name(), csv.as_bytes(), Some(table.schema()))
                .map_err(|e| format!("{}: {e}", node.name()))?;
            ensure(back.schema() == table.schema() && back.rows() == table.rows(), || {
                format!("{}: CSV round trip differs", node.name())
            })?;
            tables += 1;
        }
    }
    Ok(format!(
        "4 spec graphs round-trip with 0 violations; {tables} CSV tables re-load identically; {dots} DOT files parse"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 baltimore scenario", baltimore_census),
        ("2 rents depth and breadth", rents_metrics),
        ("3 birdstrike trends", birdstrike_trends),
        ("4 transform engine oracle", transform_engine),
        ("5 relationship model oracles", relationship_models),
        ("6 wildcard semantics", wildcard_semantics),
        ("7 graph invariants", graph_invariants),
        ("8 serialization round trips", round_trips),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    println!("{} criteria, {failed} failed", criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
