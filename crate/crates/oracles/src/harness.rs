//! Randomized cases that drive the library and check it against the
//! references in this crate. Each returns a description of the first
//! discrepancy.

use insightkit::insight::{Bindings, Members};
use insightkit::knowledge::{AnalyticContent, KnowledgeGraph, Metadata};
use insightkit::metrics::depth;
use insightkit::tabular::{AttributeType, Table};
use insightkit::transforms::{
    execute_pipeline, Aggregate, AggregateExpr, AttrRef, Datasets, JoinKey, SortKey, TransformSpec, TransformStep,
};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::graph::{audit, longest_source_chain, Edges};
use crate::relation::{filter, group_rollup, inner_join, order_by, random_predicate, random_table, Agg, Pred, Rel};

fn compare(what: &str, got: &Table, want: &Rel) -> Result<(), String> {
    let got = Rel::of(got);
    if got.names != want.names {
        return Err(format!("{what}: columns {:?}, expected {:?}", got.names, want.names));
    }
    if got.rows != want.rows {
        return Err(format!("{what}: rows\n{:?}\nexpected\n{:?}", got.rows, want.rows));
    }
    Ok(())
}

fn run(spec: &TransformSpec, datasets: &Datasets) -> Result<Table, String> {
    execute_pipeline(spec, datasets).map_err(|e| format!("engine rejected {}: {e}", spec.to_json_string()))
}

fn names(table: &Table) -> Vec<String> {
    table.schema().iter().map(|a| a.name.clone()).collect()
}

fn random_aggregates(rng: &mut impl Rng, table: &Table) -> Vec<(String, Agg, Option<String>)> {
    let mut aggs = vec![("n".to_string(), Agg::Count, None)];
    for (i, a) in table.schema().iter().enumerate() {
        if a.attribute_type == AttributeType::Quantitative && rng.random_bool(0.7) {
            let agg = *[Agg::Sum, Agg::Mean, Agg::Min, Agg::Max]
                .choose(rng)
                .expect("non-empty");
            aggs.push((format!("agg{i}"), agg, Some(a.name.clone())));
        }
    }
    aggs
}

fn aggregate_steps(keys: &[String], aggs: &[(String, Agg, Option<String>)]) -> Vec<TransformStep> {
    let rollup = TransformStep::Rollup {
        aggregates: aggs
            .iter()
            .map(|(name, agg, col)| {
                let col = || AttrRef::from(col.as_deref().expect("aggregate column"));
                let expr = match agg {
                    Agg::Count => AggregateExpr::Count,
                    Agg::Sum => AggregateExpr::Sum(col()),
                    Agg::Mean => AggregateExpr::Mean(col()),
                    Agg::Min => AggregateExpr::Min(col()),
                    Agg::Max => AggregateExpr::Max(col()),
                };
                Aggregate::new(name.clone(), expr)
            })
            .collect(),
    };
    if keys.is_empty() {
        vec![rollup]
    } else {
        let keys: Vec<&str> = keys.iter().map(String::as_str).collect();
        vec![TransformStep::groupby(&keys), rollup]
    }
}

fn oracle_rollup(rel: &Rel, keys: &[String], aggs: &[(String, Agg, Option<String>)]) -> Rel {
    let keys: Vec<&str> = keys.iter().map(String::as_str).collect();
    let aggs: Vec<(&str, Agg, Option<&str>)> = aggs.iter().map(|(n, a, c)| (n.as_str(), *a, c.as_deref())).collect();
    group_rollup(rel, &keys, &aggs)
}

fn random_sort_keys(rng: &mut impl Rng, columns: &[String]) -> Vec<(String, bool)> {
    let mut cols = columns.to_vec();
    cols.shuffle(rng);
    let count = rng.random_range(1..=cols.len().min(3));
    cols.into_iter()
        .take(count)
        .map(|c| (c, rng.random_bool(0.5)))
        .collect()
}

fn sort_step(keys: &[(String, bool)]) -> TransformStep {
    TransformStep::orderby(
        keys.iter()
            .map(|(c, d)| if *d { SortKey::desc(c) } else { SortKey::asc(c) })
            .collect(),
    )
}

fn oracle_sort(rel: &Rel, keys: &[(String, bool)]) -> Rel {
    let keys: Vec<(&str, bool)> = keys.iter().map(|(c, d)| (c.as_str(), *d)).collect();
    order_by(rel, &keys)
}

fn filter_step(pred: &Pred) -> Result<TransformStep, String> {
    TransformStep::filter(&pred.text()).map_err(|e| format!("predicate `{}` does not parse: {e}", pred.text()))
}

/// One random table (up to `max_rows` rows and `max_cols` columns) run
/// through groupby/rollup, filter, orderby, inner join and a composed
/// pipeline, each compared value for value with the nested-loop reference.
pub fn transform_case(rng: &mut impl Rng, max_rows: usize, max_cols: usize) -> Result<(), String> {
    let left = random_table(rng, "left", "c", max_rows, max_cols, None);
    let rel = Rel::of(&left);
    let columns = names(&left);

    let mut keys = columns.clone();
    keys.shuffle(rng);
    keys.truncate(rng.random_range(0..=columns.len().min(2)));
    let aggs = random_aggregates(rng, &left);
    let datasets = Datasets::new().with(left.clone());
    let spec = TransformSpec::new(&["left"], aggregate_steps(&keys, &aggs));
    let grouped = run(&spec, &datasets)?;
    compare("groupby/rollup", &grouped, &oracle_rollup(&rel, &keys, &aggs))?;
    let counted: f64 = grouped
        .column("n")
        .expect("count column")
        .filter_map(|v| v.as_f64())
        .sum();
    if counted as usize != left.row_count() && !(keys.is_empty() && left.row_count() == 0) {
        return Err(format!(
            "group counts sum to {counted}, table has {} rows",
            left.row_count()
        ));
    }

    let pred = random_predicate(rng, &left, 2);
    let spec = TransformSpec::new(&["left"], vec![filter_step(&pred)?]);
    compare(
        &format!("filter `{}`", pred.text()),
        &run(&spec, &datasets)?,
        &filter(&rel, &pred),
    )?;

    let sort = random_sort_keys(rng, &columns);
    let spec = TransformSpec::new(&["left"], vec![sort_step(&sort)]);
    compare("orderby", &run(&spec, &datasets)?, &oracle_sort(&rel, &sort))?;

    let key_col = columns.choose(rng).expect("at least one column").clone();
    let key_type = left.attribute(&key_col).expect("own column").attribute_type;
    let right = random_table(rng, "right", "c", max_rows, max_cols, Some(key_type));
    let mut on = vec![(key_col.clone(), "c0".to_string())];
    if rng.random_bool(0.3) {
        if let Some(second) =
            columns.iter().zip(names(&right)).skip(1).find(|(l, r)| {
                left.attribute(l).map(|a| a.attribute_type) == right.attribute(r).map(|a| a.attribute_type)
            })
        {
            on.push((second.0.clone(), second.1));
        }
    }
    let join_datasets = Datasets::new().with(left.clone()).with(right.clone());
    let spec = TransformSpec::new(
        &["left", "right"],
        vec![TransformStep::Join {
            right: "right".into(),
            on: on
                .iter()
                .map(|(l, r)| JoinKey {
                    left: l.as_str().into(),
                    right: r.as_str().into(),
                })
                .collect(),
        }],
    );
    let pairs: Vec<(&str, &str)> = on.iter().map(|(l, r)| (l.as_str(), r.as_str())).collect();
    compare(
        "join",
        &run(&spec, &join_datasets)?,
        &inner_join(&rel, &Rel::of(&right), &pairs),
    )?;

    // a global rollup must be the first step, so this pipeline always groups
    if keys.is_empty() {
        keys.push(columns[0].clone());
    }
    let pred = random_predicate(rng, &left, 1);
    let mut steps = vec![filter_step(&pred)?];
    steps.extend(aggregate_steps(&keys, &aggs));
    let mut out_cols: Vec<String> = keys.clone();
    out_cols.extend(aggs.iter().map(|a| a.0.clone()));
    let sort = random_sort_keys(rng, &out_cols);
    steps.push(sort_step(&sort));
    let spec = TransformSpec::new(&["left"], steps);
    let want = oracle_sort(&oracle_rollup(&filter(&rel, &pred), &keys, &aggs), &sort);
    compare("filter/groupby/rollup/orderby", &run(&spec, &datasets)?, &want)?;
    Ok(())
}

fn spec(key: &str, desc: bool) -> TransformSpec {
    TransformSpec::new(
        &["t"],
        vec![
            TransformStep::groupby(&[key]),
            TransformStep::count("n"),
            TransformStep::orderby(vec![if desc { SortKey::desc("n") } else { SortKey::asc("n") }]),
        ],
    )
}

/// Counts of operations the fuzzer attempted and the library accepted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FuzzSummary {
    pub attempted: usize,
    pub accepted: usize,
}

/// `ops` random create/add operations over a small name pool, split into
/// episodes of `episode` operations on a fresh graph, auditing the whole
/// graph after every operation.
pub fn graph_fuzz(rng: &mut impl Rng, ops: usize, episode: usize) -> Result<FuzzSummary, String> {
    let pool: Vec<String> = (0..24).map(|i| format!("n{i}")).collect();
    let concepts = ["C0", "C1", "C2", "C3"];
    let instances = ["i0", "i1", "i2"];
    let mut summary = FuzzSummary::default();
    let mut graph = KnowledgeGraph::new();
    for step in 0..ops {
        if step % episode == 0 {
            graph = KnowledgeGraph::new();
        }
        let before: Vec<String> = graph.nodes().map(|n| n.name().to_string()).collect();
        let a = pool.choose(rng).expect("pool").as_str();
        let b = pool.choose(rng).expect("pool").as_str();
        let existing = |rng: &mut _| before.choose(rng).cloned().unwrap_or_else(|| a.to_string());
        let op = rng.random_range(0..10);
        let ok = match op {
            0 => {
                let parents: Vec<&str> = concepts.iter().copied().filter(|_| rng.random_bool(0.3)).collect();
                graph
                    .create_concept(concepts.choose(rng).expect("pool"), &parents)
                    .is_ok()
            }
            1 => graph
                .create_instance(
                    instances.choose(rng).expect("pool"),
                    concepts.choose(rng).expect("pool"),
                    Metadata::new(),
                )
                .is_ok(),
            2 => graph
                .create_domain_node(a, instances.choose(rng).expect("pool"), None)
                .is_ok(),
            3 => {
                let content = AnalyticContent::transform(
                    step as u64,
                    spec(["x", "y"].choose(rng).expect("pool"), rng.random_bool(0.5)),
                );
                graph.create_analytic_node(a, content, None).is_ok()
            }
            4 => {
                let d = existing(rng);
                let an = existing(rng);
                let domain = if rng.random_bool(0.2) {
                    Members::Wildcard
                } else {
                    Members::List(vec![d])
                };
                graph.create_insight(a, domain, Members::List(vec![an]), None).is_ok()
            }
            5 => {
                let objective = existing(rng);
                let insight = existing(rng);
                graph.create_task(a, &objective, &[insight.as_str()], None).is_ok()
            }
            6 | 7 => {
                let (x, y) = if rng.random_bool(0.7) {
                    (existing(rng), existing(rng))
                } else {
                    (a.to_string(), b.to_string())
                };
                if op == 6 {
                    graph.add_source(&x, &y).is_ok()
                } else {
                    graph.add_target(&x, &y).is_ok()
                }
            }
            _ => {
                let (x, y) = (existing(rng), existing(rng));
                graph.add_related(&x, &y).is_ok()
            }
        };
        summary.attempted += 1;
        summary.accepted += usize::from(ok);
        let problems = audit(&graph);
        if !problems.is_empty() {
            return Err(format!("after operation {step} ({op}): {}", problems.join("; ")));
        }
        let after: Vec<String> = graph.nodes().map(|n| n.name().to_string()).collect();
        if after.len() < before.len() || after[..before.len()] != before[..] {
            return Err(format!("operation {step} dropped or renamed nodes"));
        }
    }
    Ok(summary)
}

/// A random DAG of up to `max_nodes` nodes built with `add_target` (cycle
/// attempts included); checks `depth` of every node against exhaustive
/// path enumeration. Returns the node count.
pub fn depth_case(rng: &mut impl Rng, max_nodes: usize) -> Result<usize, String> {
    let n = rng.random_range(1..=max_nodes);
    let mut graph = KnowledgeGraph::new();
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    for name in &names {
        graph
            .create_analytic_node(name, AnalyticContent::transform(0, spec("x", false)), None)
            .map_err(|e| e.to_string())?;
    }
    let density = rng.random_range(0.05..0.5);
    for a in &names {
        for b in &names {
            if a != b && rng.random_bool(density) {
                let _ = graph.add_target(a, b);
            }
        }
    }
    let edges = Edges::of(&graph);
    for name in &names {
        let got = depth(&graph, name).map_err(|e| e.to_string())?;
        let want = longest_source_chain(&edges.sources, name);
        if got != want {
            return Err(format!(
                "depth({name}) = {got}, longest chain has {want} nodes; sources {:?}",
                edges.sources
            ));
        }
    }
    Ok(n)
}

/// Outcome of one wildcard-widening case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WideningCase {
    /// Whether the insight satisfied the objective before widening.
    pub satisfied_before: bool,
}

fn widen_spec(rng: &mut impl Rng, spec: &mut TransformSpec) {
    let i = rng.random_range(0..spec.transforms.len());
    let step = &mut spec.transforms[i];
    match step {
        TransformStep::GroupBy { keys } if rng.random_bool(0.6) => keys[0] = AttrRef::Wildcard,
        TransformStep::OrderBy { keys } if rng.random_bool(0.6) => keys[0].attribute = AttrRef::Wildcard,
        _ => *step = TransformStep::Wildcard,
    }
}

/// Builds a random graph, a fully specified insight and an objective,
/// then widens the objective at one position (a whole member list, or one
/// attribute or step inside an analytic member's spec). Checks reflexivity,
/// monotonicity of `satisfies` under the widening, and that completing the
/// widened objective from the insight's members yields a fully specified
/// insight.
pub fn widening_case(rng: &mut impl Rng, case: usize) -> Result<WideningCase, String> {
    let err = |e: insightkit::knowledge::GraphError| e.to_string();
    let mut g = KnowledgeGraph::new();
    g.create_concept("C", &[]).map_err(err)?;
    g.create_instance("i", "C", Metadata::new()).map_err(err)?;
    let domains: Vec<String> = (0..4).map(|i| format!("d{i}")).collect();
    for d in &domains {
        g.create_domain_node(d, "i", None).map_err(err)?;
    }
    let analytics: Vec<String> = (0..5).map(|i| format!("a{i}")).collect();
    for a in &analytics {
        let content = AnalyticContent::transform(
            0,
            spec(["x", "y", "z"].choose(rng).expect("pool"), rng.random_bool(0.5)),
        );
        g.create_analytic_node(a, content, None).map_err(err)?;
    }
    let pick = |rng: &mut _, from: &[String]| -> Vec<String> {
        let mut v = from.to_vec();
        v.shuffle(rng);
        v.truncate(rand::Rng::random_range(rng, 1..=2));
        v
    };
    let insight_domain = pick(rng, &domains);
    let insight_analytic = pick(rng, &analytics);
    g.create_insight(
        "I",
        Members::List(insight_domain.clone()),
        Members::List(insight_analytic.clone()),
        None,
    )
    .map_err(err)?;
    if !g.satisfies("I", "I").map_err(err)? {
        return Err(format!("case {case}: insight does not satisfy itself"));
    }

    // The objective copies parts of the insight or of unrelated members.
    let (mut od, mut oa) = if rng.random_bool(0.7) {
        (insight_domain.clone(), insight_analytic.clone())
    } else {
        (pick(rng, &domains), pick(rng, &analytics))
    };
    od.truncate(rng.random_range(1..=od.len()));
    oa.truncate(rng.random_range(1..=oa.len()));
    g.create_insight("O", Members::List(od.clone()), Members::List(oa.clone()), None)
        .map_err(err)?;
    let before = g.satisfies("I", "O").map_err(err)?;

    let mut bindings = Bindings::default();
    let (wd, wa) = match rng.random_range(0..3) {
        0 => {
            bindings.domain = Some(insight_domain.clone());
            (Members::Wildcard, Members::List(oa.clone()))
        }
        1 => {
            bindings.analytic = Some(insight_analytic.clone());
            (Members::List(od.clone()), Members::Wildcard)
        }
        _ => {
            let i = rng.random_range(0..oa.len());
            let mut template = g
                .analytic(&oa[i])
                .map_err(err)?
                .transform
                .clone()
                .expect("transform node");
            widen_spec(rng, &mut template);
            g.create_analytic_node("T", AnalyticContent::transform(0, template), None)
                .map_err(err)?;
            bindings.members.insert("T".into(), oa[i].clone());
            let mut members = oa.clone();
            members[i] = "T".into();
            (Members::List(od.clone()), Members::List(members))
        }
    };
    g.create_insight("W", wd, wa, None).map_err(err)?;
    if g.is_fully_specified("W").map_err(err)? {
        return Err(format!("case {case}: widened objective counts as fully specified"));
    }
    let after = g.satisfies("I", "W").map_err(err)?;
    if before && !after {
        return Err(format!(
            "case {case}: widening lost a satisfying insight; {:?}",
            g.node("W").map_err(err)?
        ));
    }
    g.complete("W", &bindings, "completed").map_err(err)?;
    if !g.is_fully_specified("completed").map_err(err)? {
        return Err(format!("case {case}: completion is not fully specified"));
    }
    if !g.satisfies("completed", "completed").map_err(err)? {
        return Err(format!("case {case}: completion does not satisfy itself"));
    }
    Ok(WideningCase {
        satisfied_before: before,
    })
}
