use super::*;
use crate::knowledge::{AnalyticContent, Metadata};
use crate::relationships::RelationshipKind;
use crate::transforms::{SortKey, TransformStep};

fn peaks(key: &str) -> TransformSpec {
    TransformSpec::new(
        &["baltimoreCrime"],
        vec![
            TransformStep::groupby(&[key]),
            TransformStep::count("count"),
            TransformStep::orderby(vec![SortKey::desc("count")]),
            TransformStep::filter("rank() <= 3").unwrap(),
        ],
    )
}

/// Two domain nodes, the peak-crime node and the objectives built around
/// them.
fn baltimore() -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    g.create_concept("Protest", &[]).unwrap();
    g.create_concept("Crime", &[]).unwrap();
    g.create_instance("protests2015", "Protest", Metadata::new()).unwrap();
    g.create_instance("crimes2015", "Crime", Metadata::new()).unwrap();
    g.create_domain_node("protestsNode", "protests2015", None).unwrap();
    g.create_domain_node("crimeNode", "crimes2015", None).unwrap();
    g.create_analytic_node("crimePeaks", AnalyticContent::transform(0, peaks("CrimeDate")), None)
        .unwrap();
    g.create_insight(
        "johnsInsight",
        Members::list(&["protestsNode"]),
        Members::list(&["crimePeaks"]),
        Some("Peak Crime = Freddy Grey's Funeral"),
    )
    .unwrap();
    g.create_insight(
        "protestsObjective",
        Members::list(&["protestsNode"]),
        Members::Wildcard,
        None,
    )
    .unwrap();
    g.create_insight(
        "aprilCrimeObjective",
        Members::Wildcard,
        Members::list(&["crimePeaks"]),
        None,
    )
    .unwrap();
    g
}

#[test]
fn create_insight() {
    let mut g = baltimore();
    assert!(g.is_fully_specified("johnsInsight").unwrap());
    g.create_insight("o1", Members::Wildcard, Members::Wildcard, None)
        .unwrap();
    assert!(!g.is_fully_specified("o1").unwrap());
    assert!(g.is_objective("o1").unwrap());
    assert!(matches!(
        g.create_insight("bad", Members::list(&[]), Members::list(&["crimePeaks"]), None),
        Err(GraphError::EmptyMembers { list: "domain", .. })
    ));
    assert!(matches!(
        g.create_insight("bad", Members::list(&["ghost"]), Members::list(&["crimePeaks"]), None),
        Err(GraphError::Unresolved { .. })
    ));
    assert!(matches!(
        g.create_insight(
            "bad",
            Members::list(&["crimePeaks"]),
            Members::list(&["crimePeaks"]),
            None
        ),
        Err(GraphError::WrongKind { expected: "domain", .. })
    ));
    assert!(matches!(
        g.create_insight("johnsInsight", Members::Wildcard, Members::Wildcard, None),
        Err(GraphError::DuplicateName { .. })
    ));
    g.add_source("johnsInsight", "protestsNode").unwrap();
    assert_eq!(g.node("protestsNode").unwrap().core.targets, vec!["johnsInsight"]);
}

#[test]
fn nested_wildcards_make_objectives() {
    let mut g = baltimore();
    assert!(!g.is_fully_specified("protestsObjective").unwrap());
    g.create_analytic_node("anyPeaks", AnalyticContent::transform(0, peaks("*")), None)
        .unwrap();
    g.create_insight(
        "peaksObjective",
        Members::list(&["crimeNode"]),
        Members::list(&["anyPeaks"]),
        None,
    )
    .unwrap();
    assert!(!g.is_fully_specified("peaksObjective").unwrap());
    assert!(g.is_fully_specified("crimePeaks").is_err());
}

#[test]
fn satisfaction() {
    let mut g = baltimore();
    assert!(g.satisfies("johnsInsight", "protestsObjective").unwrap());
    assert!(g.satisfies("johnsInsight", "aprilCrimeObjective").unwrap());
    assert!(g.satisfies("johnsInsight", "johnsInsight").unwrap());
    g.create_insight("anything", Members::Wildcard, Members::Wildcard, None)
        .unwrap();
    assert!(g.satisfies("johnsInsight", "anything").unwrap());
    assert!(matches!(
        g.satisfies("protestsObjective", "anything"),
        Err(GraphError::NotFullySpecified(_))
    ));

    g.create_insight("crimeObjective", Members::list(&["crimeNode"]), Members::Wildcard, None)
        .unwrap();
    assert!(!g.satisfies("johnsInsight", "crimeObjective").unwrap());
    g.create_insight(
        "both",
        Members::list(&["protestsNode", "crimeNode"]),
        Members::list(&["crimePeaks"]),
        None,
    )
    .unwrap();
    assert!(g.satisfies("both", "crimeObjective").unwrap());
    assert!(g.satisfies("both", "johnsInsight").unwrap());
    assert!(!g.satisfies("johnsInsight", "both").unwrap());
}

#[test]
fn template_members_match_specs() {
    let mut g = baltimore();
    g.create_analytic_node("anyPeaks", AnalyticContent::transform(0, peaks("*")), None)
        .unwrap();
    g.create_insight("peaksObjective", Members::Wildcard, Members::list(&["anyPeaks"]), None)
        .unwrap();
    assert!(g.satisfies("johnsInsight", "peaksObjective").unwrap());

    let mut short = peaks("*");
    short.transforms.push(TransformStep::Wildcard);
    g.create_analytic_node("longer", AnalyticContent::transform(0, short), None)
        .unwrap();
    g.create_insight("longerObjective", Members::Wildcard, Members::list(&["longer"]), None)
        .unwrap();
    assert!(!g.satisfies("johnsInsight", "longerObjective").unwrap());
}

#[test]
fn analytic_members_match_injectively() {
    let mut g = baltimore();
    g.create_analytic_node("anyPeaks", AnalyticContent::transform(0, peaks("*")), None)
        .unwrap();
    g.create_analytic_node("anyPeaks2", AnalyticContent::transform(0, peaks("*")), None)
        .unwrap();
    g.create_insight(
        "twoPeaks",
        Members::Wildcard,
        Members::list(&["anyPeaks", "anyPeaks2"]),
        None,
    )
    .unwrap();
    assert!(!g.satisfies("johnsInsight", "twoPeaks").unwrap());
    g.create_analytic_node("premisePeaks", AnalyticContent::transform(0, peaks("Premise")), None)
        .unwrap();
    g.create_insight(
        "wide",
        Members::list(&["crimeNode"]),
        Members::list(&["crimePeaks", "premisePeaks"]),
        None,
    )
    .unwrap();
    assert!(g.satisfies("wide", "twoPeaks").unwrap());
}

#[test]
fn match_with_wildcards_cases() {
    let concrete = peaks("CrimeDate");
    let t = SpecRef::Transform(&concrete);
    assert!(match_with_wildcards(t, t).unwrap());
    let template = peaks("*");
    assert!(match_with_wildcards(SpecRef::Transform(&template), t).unwrap());
    assert!(!match_with_wildcards(t, SpecRef::Transform(&template)).unwrap());
    let mut three = concrete.clone();
    three.transforms.pop();
    assert!(!match_with_wildcards(SpecRef::Transform(&concrete), SpecRef::Transform(&three)).unwrap());
    let mut step = concrete.clone();
    step.transforms[2] = TransformStep::Wildcard;
    assert!(match_with_wildcards(SpecRef::Transform(&step), t).unwrap());
    let model = RelationshipModel::new("m", RelationshipKind::NormalDistribution, &["x"], None);
    let any = RelationshipModel::new("m", RelationshipKind::NormalDistribution, &["*"], None);
    assert!(match_with_wildcards(SpecRef::Relationship(&any), SpecRef::Relationship(&model)).unwrap());
    assert!(matches!(
        match_with_wildcards(t, SpecRef::Relationship(&model)),
        Err(GraphError::SpecKindMismatch)
    ));
}

#[test]
fn tasks() {
    let mut g = baltimore();
    g.create_task("protestsTask", "protestsObjective", &["johnsInsight"], None)
        .unwrap();
    assert_eq!(g.task_status("protestsTask").unwrap(), TaskStatus::Satisfied);
    g.create_task("t0", "protestsObjective", &[], None).unwrap();
    assert_eq!(g.task_status("t0").unwrap(), TaskStatus::Open);
    g.create_insight("crimeObjective", Members::list(&["crimeNode"]), Members::Wildcard, None)
        .unwrap();
    g.create_task("nullTask", "crimeObjective", &["johnsInsight", "johnsInsight"], None)
        .unwrap();
    assert_eq!(g.task("nullTask").unwrap().insights, vec!["johnsInsight"]);
    assert_eq!(g.task_status("nullTask").unwrap(), TaskStatus::ClosedNull);
    assert!(matches!(
        g.create_task("bad", "protestsObjective", &["aprilCrimeObjective"], None),
        Err(GraphError::NotFullySpecified(_))
    ));
    assert!(matches!(
        g.create_task("bad", "ghost", &[], None),
        Err(GraphError::Unresolved { .. })
    ));
    assert!(matches!(
        g.create_task("protestsTask", "protestsObjective", &[], None),
        Err(GraphError::DuplicateName { .. })
    ));

    g.add_target("protestsTask", "t0").unwrap();
    assert_eq!(g.node("t0").unwrap().core.sources, vec!["protestsTask"]);

    assert_eq!(g.attach_insight("t0", "johnsInsight").unwrap(), EdgeOutcome::Added);
    assert_eq!(
        g.attach_insight("t0", "johnsInsight").unwrap(),
        EdgeOutcome::AlreadyPresent
    );
    assert_eq!(g.task_status("t0").unwrap(), TaskStatus::Satisfied);
    assert!(matches!(
        g.attach_insight("t0", "protestsObjective"),
        Err(GraphError::NotFullySpecified(_))
    ));
    assert_eq!(TaskStatus::ClosedNull.to_string(), "closedNull");
}

#[test]
fn complete_fills_wildcards() {
    let mut g = baltimore();
    let node = g
        .complete("protestsObjective", &Bindings::analytic(&["crimePeaks"]), "completed")
        .unwrap();
    assert_eq!(node.core.sources, vec!["protestsObjective"]);
    let done = g.insight("completed").unwrap().clone();
    assert_eq!(&done, g.insight("johnsInsight").unwrap());
    assert!(g.is_fully_specified("completed").unwrap());
    assert!(g.insight("protestsObjective").unwrap().analytic.is_wildcard());
    assert_eq!(g.node("protestsObjective").unwrap().core.targets, vec!["completed"]);

    g.complete("johnsInsight", &Bindings::default(), "copy").unwrap();
    assert_eq!(g.insight("copy").unwrap(), g.insight("johnsInsight").unwrap());

    assert!(matches!(
        g.complete("protestsObjective", &Bindings::default(), "x"),
        Err(GraphError::UncoveredWildcard(_))
    ));
    assert!(matches!(
        g.complete("johnsInsight", &Bindings::domain(&["crimeNode"]), "x"),
        Err(GraphError::StrayBinding(_))
    ));
    assert!(matches!(
        g.complete("protestsObjective", &Bindings::analytic(&["protestsNode"]), "x"),
        Err(GraphError::WrongKind { .. })
    ));
    assert!(!g.contains("x"));
}

#[test]
fn complete_binds_template_members() {
    let mut g = baltimore();
    g.create_analytic_node("anyPeaks", AnalyticContent::transform(0, peaks("*")), None)
        .unwrap();
    g.create_insight(
        "peaksObjective",
        Members::list(&["crimeNode"]),
        Members::list(&["anyPeaks"]),
        None,
    )
    .unwrap();
    g.create_analytic_node("premisePeaks", AnalyticContent::transform(0, peaks("Premise")), None)
        .unwrap();
    let mut bindings = Bindings::default();
    bindings.members.insert("anyPeaks".into(), "premisePeaks".into());
    g.complete("peaksObjective", &bindings, "premiseInsight").unwrap();
    assert_eq!(
        g.insight("premiseInsight").unwrap().analytic,
        Members::list(&["premisePeaks"])
    );
    assert!(g.satisfies("premiseInsight", "peaksObjective").unwrap());

    let mut wrong = Bindings::default();
    wrong.members.insert("anyPeaks".into(), "crimeNode".into());
    assert!(matches!(
        g.complete("peaksObjective", &wrong, "x"),
        Err(GraphError::BindingMismatch { .. })
    ));
    let mut stray = bindings.clone();
    stray.members.insert("crimePeaks".into(), "premisePeaks".into());
    assert!(matches!(
        g.complete("peaksObjective", &stray, "x"),
        Err(GraphError::StrayBinding(_))
    ));
}

#[test]
fn matching_insights_are_sorted() {
    let mut g = baltimore();
    g.complete("protestsObjective", &Bindings::analytic(&["crimePeaks"]), "aCompleted")
        .unwrap();
    assert_eq!(
        g.matching_insights("protestsObjective").unwrap(),
        vec!["aCompleted", "johnsInsight"]
    );
    g.create_insight("absent", Members::list(&["ghostNode"]), Members::Wildcard, None)
        .unwrap();
    assert!(g.matching_insights("absent").unwrap().is_empty());
}

#[test]
fn members_json() {
    assert_eq!(serde_json::to_string(&Members::Wildcard).unwrap(), "\"*\"");
    assert_eq!(
        serde_json::to_string(&Members::list(&["a", "b"])).unwrap(),
        "[\"a\",\"b\"]"
    );
    let back: Members = serde_json::from_str("\"*\"").unwrap();
    assert!(back.is_wildcard());
    assert!(serde_json::from_str::<Members>("\"x\"").is_err());
    assert_eq!(Members::list(&["a", "b"]).to_string(), "[a, b]");
}
