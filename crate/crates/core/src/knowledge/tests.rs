use super::*;
use crate::relationships::RelationshipKind;
use crate::tabular::read_csv;
use crate::transforms::{execute_pipeline, SortKey, TransformStep};

fn crime() -> Table {
    let csv = "CrimeDate,Premise,Weapon\n\
               2015-04-27,STREET,FIREARM\n2015-04-28,ROW,KNIFE\n2015-04-27,ROW,FIREARM\n2015-04-29,STREET,KNIFE\n\
               2015-04-28,STREET,FIREARM\n2015-04-30,ROW,KNIFE\n2015-04-27,STREET,FIREARM\n2015-04-26,ROW,KNIFE\n";
    read_csv("baltimoreCrime", csv.as_bytes(), None).unwrap()
}

fn peaks() -> TransformSpec {
    TransformSpec::new(
        &["baltimoreCrime"],
        vec![
            TransformStep::groupby(&["CrimeDate"]),
            TransformStep::count("count"),
            TransformStep::orderby(vec![SortKey::desc("count")]),
            TransformStep::filter("rank() <= 3").unwrap(),
        ],
    )
}

fn protests() -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    g.create_concept("Protest", &[]).unwrap();
    let meta = Metadata::new().with(
        Attribute::nominal("link"),
        Value::text("https://en.wikipedia.org/wiki/2015_Baltimore_protests"),
    );
    g.create_instance("WikipediaArticle-2015BaltimoreProtests", "Protest", meta)
        .unwrap();
    g.create_domain_node("protestsNode", "WikipediaArticle-2015BaltimoreProtests", None)
        .unwrap();
    g
}

#[test]
fn concepts() {
    let mut g = KnowledgeGraph::new();
    assert!(g.create_concept("Protest", &[]).unwrap().parents.is_empty());
    g.create_concept("Crime", &[]).unwrap();
    assert_eq!(
        g.create_concept("ViolentCrime", &["Crime"]).unwrap().parents,
        vec!["Crime"]
    );
    assert!(matches!(
        g.create_concept("Crime", &[]),
        Err(GraphError::DuplicateName { .. })
    ));
    assert!(matches!(
        g.create_concept("Riot", &["Nope"]),
        Err(GraphError::Unresolved { .. })
    ));
    assert!(matches!(
        g.create_concept("Loop", &["Loop"]),
        Err(GraphError::ConceptCycle(_))
    ));
    assert_eq!(g.concepts().count(), 3);
}

#[test]
fn instances() {
    let mut g = protests();
    assert_eq!(
        g.instance("WikipediaArticle-2015BaltimoreProtests").unwrap().concept,
        "Protest"
    );
    g.create_instance("bare", "Protest", Metadata::new()).unwrap();
    assert!(matches!(
        g.create_instance("bad", "Nope", Metadata::new()),
        Err(GraphError::Unresolved { .. })
    ));
    let stray = Metadata {
        attributes: vec![],
        values: [("x".to_string(), Value::Number(1.0))].into(),
    };
    assert!(matches!(
        g.create_instance("stray", "Protest", stray),
        Err(GraphError::StrayMetadataKey(_))
    ));
    let mistyped = Metadata::new().with(Attribute::quantitative("n"), Value::text("many"));
    assert!(matches!(
        g.create_instance("typed", "Protest", mistyped),
        Err(GraphError::Table(_))
    ));
    assert!(matches!(
        g.create_instance("bare", "Protest", Metadata::new()),
        Err(GraphError::DuplicateName { .. })
    ));
}

#[test]
fn domain_nodes() {
    let mut g = protests();
    g.create_domain_node("again", "WikipediaArticle-2015BaltimoreProtests", Some("same instance"))
        .unwrap();
    assert_eq!(
        g.node("again").unwrap().core.description.as_deref(),
        Some("same instance")
    );
    assert!(matches!(
        g.create_domain_node("x", "nope", None),
        Err(GraphError::Unresolved { .. })
    ));
    assert!(matches!(
        g.create_domain_node("again", "WikipediaArticle-2015BaltimoreProtests", None),
        Err(GraphError::DuplicateName { .. })
    ));
    assert!(matches!(
        g.add_source("protestsNode", "protestsNode"),
        Err(GraphError::SelfEdge(_))
    ));
    assert!(matches!(g.node("missing"), Err(GraphError::Unresolved { .. })));
}

#[test]
fn analytic_nodes() {
    let mut g = protests();
    let node = g
        .create_analytic_node(
            "peakCrimes",
            AnalyticContent::transform(now_millis(), peaks()),
            Some("top 3 days of reported crimes"),
        )
        .unwrap();
    assert_eq!(node.kind_name(), "analytic");
    let empty = AnalyticContent {
        timestamp: 0,
        transform: None,
        relationship: None,
        dataset: None,
    };
    assert!(matches!(
        g.create_analytic_node("empty", empty, None),
        Err(GraphError::EmptyAnalyticNode(_))
    ));
    let tree = RelationshipModel::new(
        "dt",
        RelationshipKind::DecisionTreeClassification,
        &["Premise"],
        Some("Weapon"),
    );
    let node = g
        .create_analytic_node(
            "predictCrimeTypeNode",
            AnalyticContent::relationship(0, tree, "baltimoreCrime"),
            None,
        )
        .unwrap();
    assert!(node.as_analytic().unwrap().transform.is_none());
    assert!(matches!(
        g.create_analytic_node("protestsNode", AnalyticContent::transform(0, peaks()), None),
        Err(GraphError::DuplicateName { .. })
    ));
}

#[test]
fn edges_are_symmetric() {
    let mut g = protests();
    g.create_analytic_node("a", AnalyticContent::transform(0, peaks()), None)
        .unwrap();
    g.create_analytic_node("b", AnalyticContent::transform(0, peaks()), None)
        .unwrap();
    assert_eq!(g.add_target("a", "b").unwrap(), EdgeOutcome::Added);
    assert_eq!(g.node("b").unwrap().core.sources, vec!["a"]);
    assert_eq!(g.node("a").unwrap().core.targets, vec!["b"]);
    assert_eq!(g.add_source("b", "a").unwrap(), EdgeOutcome::AlreadyPresent);
    assert!(matches!(g.add_source("a", "b"), Err(GraphError::Cycle { .. })));
    assert_eq!(g.add_related("a", "protestsNode").unwrap(), EdgeOutcome::Added);
    assert_eq!(g.node("a").unwrap().core.related, vec!["protestsNode"]);
    assert_eq!(g.node("protestsNode").unwrap().core.related, vec!["a"]);
    assert_eq!(g.add_related("protestsNode", "a").unwrap(), EdgeOutcome::AlreadyPresent);
    assert!(matches!(g.add_related("a", "a"), Err(GraphError::SelfEdge(_))));
    assert!(matches!(g.add_target("a", "ghost"), Err(GraphError::Unresolved { .. })));
}

#[test]
fn longer_cycles_are_rejected() {
    let mut g = KnowledgeGraph::new();
    for n in ["a", "b", "c"] {
        g.create_analytic_node(n, AnalyticContent::transform(0, peaks()), None)
            .unwrap();
    }
    g.add_target("a", "b").unwrap();
    g.add_target("b", "c").unwrap();
    assert!(matches!(g.add_target("c", "a"), Err(GraphError::Cycle { .. })));
    assert!(g.node("a").unwrap().core.sources.is_empty());
    assert!(g.reaches("a", "c"));
    assert!(!g.reaches("c", "a"));
}

#[test]
fn transform_results_are_memoized() {
    let mut g = protests();
    g.create_analytic_node("peakCrimes", AnalyticContent::transform(0, peaks()), None)
        .unwrap();
    let ds = Datasets::new().with(crime());
    let first = g.results("peakCrimes", &ds).unwrap();
    let expected = execute_pipeline(&peaks(), &ds).unwrap();
    let table = first.table().unwrap();
    assert_eq!(table.name(), "peakCrimes");
    assert_eq!(table.rows(), expected.rows());
    assert_eq!(table.row_count(), 3);
    let second = g.results("peakCrimes", &ds).unwrap();
    assert!(Arc::ptr_eq(&first, &second));
    let other = Datasets::new().with(crime());
    assert!(!Arc::ptr_eq(&first, &g.results("peakCrimes", &other).unwrap()));
    assert!(matches!(
        g.results("protestsNode", &ds),
        Err(GraphError::WrongKind { .. })
    ));
}

#[test]
fn combined_node_trains_on_pipeline_output() {
    let mut g = KnowledgeGraph::new();
    let spec = TransformSpec::new(
        &["baltimoreCrime"],
        vec![TransformStep::filter("Premise == \"STREET\"").unwrap()],
    );
    let model = RelationshipModel::new(
        "dt",
        RelationshipKind::DecisionTreeClassification,
        &["CrimeDate"],
        Some("Weapon"),
    );
    g.create_analytic_node(
        "streetWeapons",
        AnalyticContent::pipeline_model(0, spec.clone(), model.clone()),
        None,
    )
    .unwrap();
    let ds = Datasets::new().with(crime());
    let result = g.results("streetWeapons", &ds).unwrap();
    let AnalyticResult::Model {
        model: trained,
        report,
        training,
    } = result.as_ref()
    else {
        panic!("expected a model result");
    };
    let filtered = execute_pipeline(&spec, &ds).unwrap();
    assert_eq!(training.rows(), filtered.rows());
    let manual = model.train_table(&filtered).unwrap();
    assert_eq!(trained.training_rows(), manual.training_rows());
    assert_eq!(report, &manual.evaluate_table(&filtered).unwrap());
    assert_eq!(report.rows, 4);
}

#[test]
fn relationship_only_node_needs_its_dataset() {
    let mut g = KnowledgeGraph::new();
    let model = RelationshipModel::new(
        "dt",
        RelationshipKind::DecisionTreeClassification,
        &["Premise"],
        Some("Weapon"),
    );
    g.create_analytic_node("dt", AnalyticContent::relationship(0, model, "baltimoreCrime"), None)
        .unwrap();
    assert!(matches!(
        g.results("dt", &Datasets::new()),
        Err(GraphError::Transform(_))
    ));
    let ds = Datasets::new().with(crime());
    let report = g.results("dt", &ds).unwrap().report().unwrap().clone();
    assert_eq!(report.rows, 8);
}

#[test]
fn failures_propagate() {
    let mut g = KnowledgeGraph::new();
    let spec = TransformSpec::new(
        &["baltimoreCrime"],
        vec![TransformStep::groupby(&["Nope"]), TransformStep::count("n")],
    );
    g.create_analytic_node("bad", AnalyticContent::transform(0, spec), None)
        .unwrap();
    let ds = Datasets::new().with(crime());
    assert!(matches!(g.results("bad", &ds), Err(GraphError::Transform(_))));
    assert!(g.check_analytic("bad", &ds).is_err());
}

#[test]
fn document_round_trip() {
    let mut g = protests();
    g.create_analytic_node("peakCrimes", AnalyticContent::transform(7, peaks()), Some("top days"))
        .unwrap();
    g.add_source("peakCrimes", "protestsNode").unwrap();
    g.create_analytic_node("other", AnalyticContent::transform(8, peaks()), None)
        .unwrap();
    g.add_related("other", "peakCrimes").unwrap();
    let doc = g.to_document();
    assert_eq!(doc.edges.len(), 2);
    assert_eq!(doc.edges[0], EdgeDocument::source_target("protestsNode", "peakCrimes"));
    assert_eq!(doc.edges[1], EdgeDocument::related("other", "peakCrimes"));
    let text = serde_json::to_string(&doc).unwrap();
    let back = KnowledgeGraph::from_json_str(&text).unwrap();
    assert_eq!(back.to_document(), doc);
    assert_eq!(
        back.instance("WikipediaArticle-2015BaltimoreProtests").unwrap(),
        g.instance("WikipediaArticle-2015BaltimoreProtests").unwrap()
    );
}

#[test]
fn invalid_documents_are_reported() {
    let mut doc = protests().to_document();
    doc.edges.push(EdgeDocument::source_target("protestsNode", "ghost"));
    assert!(matches!(KnowledgeGraph::from_document(&doc), Err(GraphError::Invalid(v)) if v.len() == 1));
    let mut doc = protests().to_document();
    doc.nodes.push(doc.nodes[0].clone());
    assert!(matches!(
        KnowledgeGraph::from_document(&doc),
        Err(GraphError::DuplicateName { .. })
    ));
    assert!(matches!(
        KnowledgeGraph::from_json_str("{\"nodes\": 3}"),
        Err(GraphError::Json(_))
    ));
}
