use super::*;
use crate::insight::Members;
use crate::knowledge::{AnalyticContent, Metadata};
use crate::relationships::{RelationshipKind, RelationshipModel};
use crate::tabular::{Attribute, Table, Value};
use crate::transforms::{Aggregate, AggregateExpr, BinSpec, TransformSpec, TransformStep};

fn spec() -> TransformSpec {
    TransformSpec::new(&["t"], vec![])
}

fn chain(g: &mut KnowledgeGraph, names: &[&str]) {
    for n in names {
        if !g.contains(n) {
            g.create_analytic_node(n, AnalyticContent::transform(0, spec()), None)
                .unwrap();
        }
    }
    for w in names.windows(2) {
        g.add_target(w[0], w[1]).unwrap();
    }
}

/// 10 rows by 4 columns; `a` takes three values.
fn ten_by_four() -> Table {
    let rows = (0..10)
        .map(|i| {
            vec![
                Value::text(["x", "y", "z"][i % 3]),
                Value::Number(i as f64),
                Value::Number(2.0 * i as f64),
                Value::text("pad"),
            ]
        })
        .collect();
    let schema = vec![
        Attribute::nominal("a"),
        Attribute::quantitative("b"),
        Attribute::quantitative("c"),
        Attribute::nominal("d"),
    ];
    Table::new("t", schema, rows).unwrap()
}

#[test]
fn depth_counts_nodes() {
    let mut g = KnowledgeGraph::new();
    chain(&mut g, &["r1"]);
    assert_eq!(depth(&g, "r1").unwrap(), 1);
    chain(&mut g, &["a", "b", "c"]);
    assert_eq!(depth(&g, "c").unwrap(), 3);
    chain(&mut g, &["p", "q", "sink"]);
    chain(&mut g, &["w", "x", "y", "z", "sink"]);
    assert_eq!(depth(&g, "sink").unwrap(), 5);
    assert!(matches!(depth(&g, "ghost"), Err(GraphError::Unresolved { .. })));
}

#[test]
fn breadth_of_grouped_sum() {
    let mut g = KnowledgeGraph::new();
    let s = TransformSpec::new(
        &["t"],
        vec![
            TransformStep::groupby(&["a"]),
            TransformStep::rollup(vec![Aggregate::new("s", AggregateExpr::Sum("b".into()))]),
        ],
    );
    g.create_analytic_node("n", AnalyticContent::transform(0, s), None)
        .unwrap();
    let ds = Datasets::new().with(ten_by_four());
    let b = breadth_cells(&g, "n", &ds).unwrap();
    assert_eq!((b.input_cells, b.output_cells, b.dataset_cells), (20, 6, 40));
    assert!((breadth(&g, "n", &ds).unwrap() - 0.65).abs() < 1e-12);
    let report = metric_report(&g, "n", &ds).unwrap();
    assert_eq!(report.depth, 1);
    assert_eq!(report.breadth, Some(0.65));
}

#[test]
fn empty_output_breadth() {
    let mut g = KnowledgeGraph::new();
    let s = TransformSpec::new(&["t"], vec![TransformStep::filter("b > 100").unwrap()]);
    g.create_analytic_node("n", AnalyticContent::transform(0, s), None)
        .unwrap();
    let ds = Datasets::new().with(ten_by_four());
    let b = breadth_cells(&g, "n", &ds).unwrap();
    assert_eq!(b.output_cells, 0);
    assert_eq!(b.ratio(), b.input_cells as f64 / 40.0);
}

#[test]
fn histogram_is_broader_than_summaries() {
    let mut g = KnowledgeGraph::new();
    let minmax = TransformSpec::new(
        &["t"],
        vec![TransformStep::rollup(vec![
            Aggregate::new("min", AggregateExpr::Min("b".into())),
            Aggregate::new("max", AggregateExpr::Max("b".into())),
        ])],
    );
    let histogram = TransformSpec::new(
        &["t"],
        vec![
            TransformStep::Bin {
                attribute: "b".into(),
                bins: BinSpec::Count(5),
                name: "bin".into(),
            },
            TransformStep::groupby(&["bin_start", "bin_end"]),
            TransformStep::count("count"),
        ],
    );
    let normal = RelationshipModel::new("fit", RelationshipKind::NormalDistribution, &["b"], None);
    g.create_analytic_node("minmax", AnalyticContent::transform(0, minmax), None)
        .unwrap();
    g.create_analytic_node("histogram", AnalyticContent::transform(0, histogram), None)
        .unwrap();
    g.create_analytic_node("normalFit", AnalyticContent::relationship(0, normal, "t"), None)
        .unwrap();
    let ds = Datasets::new().with(ten_by_four());
    let cells = |n| breadth_cells(&g, n, &ds).unwrap();
    assert_eq!(cells("minmax").input_cells, cells("histogram").input_cells);
    assert_eq!(cells("normalFit").input_cells, 10);
    assert_eq!(cells("normalFit").output_cells, 3);
    let b = |n| breadth(&g, n, &ds).unwrap();
    assert!(b("minmax") < b("histogram"));
    assert!(b("normalFit") < b("histogram"));
    assert_eq!(metric_report(&g, "normalFit", &ds).unwrap().dataset_cells, Some(40));
}

#[test]
fn breadth_ignores_row_and_column_order() {
    let t = ten_by_four();
    let mut rows = t.rows().to_vec();
    rows.reverse();
    let order = [3, 1, 0, 2];
    let schema: Vec<_> = order.iter().map(|&i| t.schema()[i].clone()).collect();
    let rows: Vec<Vec<Value>> = rows
        .iter()
        .map(|r| order.iter().map(|&i| r[i].clone()).collect())
        .collect();
    let shuffled = Table::new("t", schema, rows).unwrap();
    let mut g = KnowledgeGraph::new();
    let s = TransformSpec::new(&["t"], vec![TransformStep::groupby(&["a"]), TransformStep::count("n")]);
    g.create_analytic_node("n", AnalyticContent::transform(0, s), None)
        .unwrap();
    let a = breadth(&g, "n", &Datasets::new().with(t)).unwrap();
    let b = breadth(&g, "n", &Datasets::new().with(shuffled)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stats() {
    assert_eq!(graph_stats(&KnowledgeGraph::new()), GraphStats::default());
    let mut g = KnowledgeGraph::new();
    chain(&mut g, &["solo"]);
    let s = graph_stats(&g);
    assert_eq!(
        (s.analytic_nodes, s.max_depth, s.roots.clone()),
        (1, 1, vec!["solo".to_string()])
    );
    g.create_concept("C", &[]).unwrap();
    g.create_instance("i", "C", Metadata::new()).unwrap();
    g.create_domain_node("d", "i", None).unwrap();
    g.create_insight("ins", Members::list(&["d"]), Members::list(&["solo"]), None)
        .unwrap();
    g.create_insight("obj", Members::Wildcard, Members::list(&["solo"]), None)
        .unwrap();
    g.create_task("task", "obj", &["ins"], None).unwrap();
    g.add_target("d", "ins").unwrap();
    g.add_target("solo", "ins").unwrap();
    g.add_related("obj", "ins").unwrap();
    let s = graph_stats(&g);
    assert_eq!(
        (
            s.concepts,
            s.instances,
            s.domain_nodes,
            s.insights,
            s.objectives,
            s.tasks
        ),
        (1, 1, 1, 1, 1, 1)
    );
    assert_eq!((s.source_target_edges, s.related_edges, s.max_depth), (2, 1, 2));
    assert_eq!(s.roots, vec!["solo", "d", "obj", "task"]);
    assert_eq!(s.object_count(), 7);
}

fn valid() -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    g.create_concept("C", &[]).unwrap();
    g.create_instance("i", "C", Metadata::new()).unwrap();
    g.create_domain_node("d", "i", None).unwrap();
    chain(&mut g, &["a", "b"]);
    g.create_insight("ins", Members::list(&["d"]), Members::list(&["b"]), None)
        .unwrap();
    g.create_task("task", "ins", &["ins"], None).unwrap();
    g
}

#[test]
fn validate_clean_graph() {
    assert!(validate(&valid()).is_empty());
}

#[test]
fn validate_asymmetric_edge() {
    let mut g = valid();
    g.node_mut_unchecked("b").unwrap().core.sources.clear();
    let v = validate(&g);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].rule, Rule::EdgeSymmetry);
    assert_eq!(v[0].nodes, vec!["a", "b"]);
}

#[test]
fn validate_dangling_member() {
    let mut g = valid();
    if let NodeKind::Insight(c) = &mut g.node_mut_unchecked("ins").unwrap().kind {
        c.analytic = Members::list(&["ghost"]);
    }
    let v = validate(&g);
    assert_eq!(v.len(), 2, "{v:?}");
    assert_eq!(v[0].rule, Rule::InsightMembers);
    // the task's insight is no longer fully specified
    assert_eq!(v[1].rule, Rule::TaskMembers);
}

#[test]
fn validate_cycles_and_self_edges() {
    let mut g = valid();
    g.node_mut_unchecked("b").unwrap().core.targets.push("a".into());
    g.node_mut_unchecked("a").unwrap().core.sources.push("b".into());
    let v = validate(&g);
    assert_eq!(v.iter().map(|x| x.rule).collect::<Vec<_>>(), vec![Rule::Cycle]);
    assert_eq!(v[0].nodes, vec!["a", "b"]);

    let mut g = valid();
    g.node_mut_unchecked("d").unwrap().core.related.push("d".into());
    assert_eq!(validate(&g)[0].rule, Rule::SelfEdge);
    let mut g = valid();
    g.node_mut_unchecked("a").unwrap().core.targets.push("b".into());
    let rules: Vec<_> = validate(&g).into_iter().map(|x| x.rule).collect();
    assert_eq!(rules, vec![Rule::DuplicateEdge]);
    let mut g = valid();
    g.node_mut_unchecked("a").unwrap().core.targets.push("ghost".into());
    assert_eq!(validate(&g)[0].rule, Rule::EdgeEndpoint);
}

#[test]
fn validate_registry_rules() {
    let mut doc = valid().to_document();
    doc.concepts[0].parents.push("C".into());
    doc.instances[0].concept = "Nope".into();
    doc.instances[0]
        .metadata
        .values
        .insert("stray".into(), serde_json::json!(1));
    let g = KnowledgeGraph::from_document_unchecked(&doc).unwrap();
    let rules: Vec<_> = validate(&g).into_iter().map(|x| x.rule).collect();
    assert_eq!(rules, vec![Rule::ConceptCycle, Rule::Resolution, Rule::Metadata]);
    assert_eq!(Rule::EdgeSymmetry.to_string(), "edge-symmetry");
}
