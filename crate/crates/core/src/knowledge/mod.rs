//! The knowledge graph: concepts, instances and named nodes joined by
//! source/target and related edges.
//!
//! Node names are unique across the graph. Source/target edges are stored on
//! both endpoints and must stay acyclic; related edges are symmetric and
//! unconstrained. Insight and task nodes live in the same registry (see
//! [`crate::insight`]).

mod document;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::insight::{InsightContent, TaskContent};
use crate::metrics::Violation;
use crate::relationships::{EvaluationReport, ModelError, RelationshipModel};
use crate::tabular::{Attribute, Table, TableError, Value};
use crate::transforms::{bind_pipeline, Datasets, TransformError, TransformSpec};

pub use document::{
    ConceptDocument, EdgeDocument, EdgeType, GraphDocument, InstanceDocument, MetadataDocument, NodeDocument,
};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("unresolved {kind} `{name}`")]
    Unresolved { kind: &'static str, name: String },
    #[error("concept hierarchy cycle through `{0}`")]
    ConceptCycle(String),
    #[error("metadata value `{0}` has no matching metadata attribute")]
    StrayMetadataKey(String),
    #[error("analytic node `{0}` needs a transform or a relationship")]
    EmptyAnalyticNode(String),
    #[error("self-edge on `{0}`")]
    SelfEdge(String),
    #[error("edge `{from}` -> `{to}` would create a cycle")]
    Cycle { from: String, to: String },
    #[error("`{name}` is not a {expected} node")]
    WrongKind { name: String, expected: &'static str },
    #[error("`{node}` has an empty {list} list")]
    EmptyMembers { node: String, list: &'static str },
    #[error("`{0}` is not fully specified")]
    NotFullySpecified(String),
    #[error("wildcard `{0}` is not covered by the bindings")]
    UncoveredWildcard(String),
    #[error("binding `{0}` does not correspond to a wildcard")]
    StrayBinding(String),
    #[error("`{concrete}` does not match template `{template}`")]
    BindingMismatch { template: String, concrete: String },
    #[error("relationship-only node `{0}` names no dataset")]
    MissingDataset(String),
    #[error("cannot match a transform spec against a relationship model")]
    SpecKindMismatch,
    #[error("graph has {} violation(s); first: {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("invalid graph document: {0}")]
    Json(#[from] serde_json::Error),
}

/// A domain concept, optionally specializing parent concepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    #[serde(default)]
    pub parents: Vec<String>,
}

/// Typed key/value data attached to an instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub attributes: Vec<Attribute>,
    pub values: BTreeMap<String, Value>,
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, attribute: Attribute, value: Value) -> Self {
        self.values.insert(attribute.name.clone(), value);
        self.attributes.push(attribute);
        self
    }

    fn check(&self) -> Result<(), GraphError> {
        for (key, value) in &self.values {
            let attr = self
                .attributes
                .iter()
                .find(|a| a.name == *key)
                .ok_or_else(|| GraphError::StrayMetadataKey(key.clone()))?;
            if !attr.admits(value) {
                return Err(TableError::InvalidValue {
                    attribute: key.clone(),
                    detail: format!("{} value in {} metadata attribute", value.tag(), attr.attribute_type),
                }
                .into());
            }
        }
        Ok(())
    }
}

/// A concrete thing in the world, typed by a concept.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub concept: String,
    pub metadata: Metadata,
}

/// Fields shared by every node kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeCore {
    pub name: String,
    pub description: Option<String>,
    pub sources: Vec<String>,
    pub targets: Vec<String>,
    pub related: Vec<String>,
}

/// Analytic content: a pipeline, a model, or a pipeline feeding a model.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticContent {
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub transform: Option<TransformSpec>,
    pub relationship: Option<RelationshipModel>,
    /// Table a relationship-only node trains on.
    pub dataset: Option<String>,
}

impl AnalyticContent {
    pub fn transform(timestamp: u64, spec: TransformSpec) -> Self {
        Self {
            timestamp,
            transform: Some(spec),
            relationship: None,
            dataset: None,
        }
    }

    pub fn relationship(timestamp: u64, model: RelationshipModel, dataset: &str) -> Self {
        Self {
            timestamp,
            transform: None,
            relationship: Some(model),
            dataset: Some(dataset.to_string()),
        }
    }

    /// A pipeline whose output trains `model`.
    pub fn pipeline_model(timestamp: u64, spec: TransformSpec, model: RelationshipModel) -> Self {
        Self {
            timestamp,
            transform: Some(spec),
            relationship: Some(model),
            dataset: None,
        }
    }

    pub fn has_wildcard(&self) -> bool {
        self.transform.as_ref().is_some_and(TransformSpec::has_wildcard)
            || self.relationship.as_ref().is_some_and(RelationshipModel::has_wildcard)
    }

    /// Template matching of declared content; `self` is the template.
    pub fn matches(&self, concrete: &AnalyticContent) -> bool {
        let transform = match (&self.transform, &concrete.transform) {
            (None, None) => true,
            (Some(t), Some(c)) => t.matches(c),
            _ => false,
        };
        let relationship = match (&self.relationship, &concrete.relationship) {
            (None, None) => true,
            (Some(t), Some(c)) => t.matches(c),
            _ => false,
        };
        transform && relationship && self.dataset == concrete.dataset
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum NodeKind {
    Domain { instance: String },
    Analytic(AnalyticContent),
    Insight(InsightContent),
    Task(TaskContent),
}

impl NodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Domain { .. } => "domain",
            NodeKind::Analytic(_) => "analytic",
            NodeKind::Insight(_) => "insight",
            NodeKind::Task(_) => "task",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub core: NodeCore,
    pub kind: NodeKind,
}

impl Node {
    pub fn name(&self) -> &str {
        &self.core.name
    }

    pub fn kind_name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn as_analytic(&self) -> Option<&AnalyticContent> {
        match &self.kind {
            NodeKind::Analytic(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_insight(&self) -> Option<&InsightContent> {
        match &self.kind {
            NodeKind::Insight(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_task(&self) -> Option<&TaskContent> {
        match &self.kind {
            NodeKind::Task(t) => Some(t),
            _ => None,
        }
    }
}

/// Outcome of an edge or membership insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOutcome {
    Added,
    /// The edge already existed; nothing changed.
    AlreadyPresent,
}

/// Output of an analytic node.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum AnalyticResult {
    /// A transform-only node's output table.
    Table(Table),
    /// A relationship node's trained model, its in-sample evaluation and the
    /// table it was trained on.
    Model {
        model: RelationshipModel,
        report: EvaluationReport,
        training: Table,
    },
}

impl AnalyticResult {
    pub fn table(&self) -> Option<&Table> {
        match self {
            AnalyticResult::Table(t) => Some(t),
            AnalyticResult::Model { .. } => None,
        }
    }

    pub fn report(&self) -> Option<&EvaluationReport> {
        match self {
            AnalyticResult::Table(_) => None,
            AnalyticResult::Model { report, .. } => Some(report),
        }
    }
}

type ResultKey = (String, u64);

/// See the module documentation.
#[derive(Default)]
pub struct KnowledgeGraph {
    concepts: IndexMap<String, Concept>,
    instances: IndexMap<String, Instance>,
    nodes: IndexMap<String, Node>,
    memo: Mutex<HashMap<ResultKey, Arc<AnalyticResult>>>,
}

impl Clone for KnowledgeGraph {
    fn clone(&self) -> Self {
        Self {
            concepts: self.concepts.clone(),
            instances: self.instances.clone(),
            nodes: self.nodes.clone(),
            memo: Mutex::new(self.memo.lock().expect("memo lock").clone()),
        }
    }
}

impl fmt::Debug for KnowledgeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KnowledgeGraph")
            .field("concepts", &self.concepts)
            .field("instances", &self.instances)
            .field("nodes", &self.nodes)
            .finish_non_exhaustive()
    }
}

/// Current time in milliseconds since the Unix epoch.
pub fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn unresolved(kind: &'static str, name: &str) -> GraphError {
    GraphError::Unresolved {
        kind,
        name: name.to_string(),
    }
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.instances.values()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.nodes.contains_key(name)
    }

    pub fn concept(&self, name: &str) -> Result<&Concept, GraphError> {
        self.concepts.get(name).ok_or_else(|| unresolved("concept", name))
    }

    pub fn instance(&self, name: &str) -> Result<&Instance, GraphError> {
        self.instances.get(name).ok_or_else(|| unresolved("instance", name))
    }

    pub fn node(&self, name: &str) -> Result<&Node, GraphError> {
        self.nodes.get(name).ok_or_else(|| unresolved("node", name))
    }

    /// Mutable node access that bypasses every invariant check. Callers are
    /// expected to run [`crate::metrics::validate`] afterwards.
    pub fn node_mut_unchecked(&mut self, name: &str) -> Option<&mut Node> {
        self.memo.get_mut().expect("memo lock").clear();
        self.nodes.get_mut(name)
    }

    pub fn analytic(&self, name: &str) -> Result<&AnalyticContent, GraphError> {
        self.node(name)?.as_analytic().ok_or_else(|| GraphError::WrongKind {
            name: name.to_string(),
            expected: "analytic",
        })
    }

    pub fn create_concept(&mut self, name: &str, parents: &[&str]) -> Result<&Concept, GraphError> {
        if self.concepts.contains_key(name) {
            return Err(GraphError::DuplicateName {
                kind: "concept",
                name: name.to_string(),
            });
        }
        for p in parents {
            if *p == name {
                return Err(GraphError::ConceptCycle(name.to_string()));
            }
            self.concept(p)?;
        }
        let concept = Concept {
            name: name.to_string(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
        };
        Ok(self.concepts.entry(name.to_string()).or_insert(concept))
    }

    pub fn create_instance(&mut self, name: &str, concept: &str, metadata: Metadata) -> Result<&Instance, GraphError> {
        if self.instances.contains_key(name) {
            return Err(GraphError::DuplicateName {
                kind: "instance",
                name: name.to_string(),
            });
        }
        self.concept(concept)?;
        metadata.check()?;
        let instance = Instance {
            name: name.to_string(),
            concept: concept.to_string(),
            metadata,
        };
        Ok(self.instances.entry(name.to_string()).or_insert(instance))
    }

    pub(crate) fn insert_node(
        &mut self,
        name: &str,
        description: Option<&str>,
        kind: NodeKind,
    ) -> Result<&Node, GraphError> {
        if self.nodes.contains_key(name) {
            return Err(GraphError::DuplicateName {
                kind: "node",
                name: name.to_string(),
            });
        }
        let node = Node {
            core: NodeCore {
                name: name.to_string(),
                description: description.map(str::to_string),
                ..Default::default()
            },
            kind,
        };
        Ok(self.nodes.entry(name.to_string()).or_insert(node))
    }

    pub fn create_domain_node(
        &mut self,
        name: &str,
        instance: &str,
        description: Option<&str>,
    ) -> Result<&Node, GraphError> {
        self.instance(instance)?;
        self.insert_node(
            name,
            description,
            NodeKind::Domain {
                instance: instance.to_string(),
            },
        )
    }

    pub fn create_analytic_node(
        &mut self,
        name: &str,
        content: AnalyticContent,
        description: Option<&str>,
    ) -> Result<&Node, GraphError> {
        if content.transform.is_none() && content.relationship.is_none() {
            return Err(GraphError::EmptyAnalyticNode(name.to_string()));
        }
        self.insert_node(name, description, NodeKind::Analytic(content))
    }

    /// Records `source -> node`: `source` joins `node`'s sources and `node`
    /// joins `source`'s targets.
    pub fn add_source(&mut self, node: &str, source: &str) -> Result<EdgeOutcome, GraphError> {
        self.add_directed(source, node)
    }

    /// Records `node -> target`. Equivalent to `add_source(target, node)`.
    pub fn add_target(&mut self, node: &str, target: &str) -> Result<EdgeOutcome, GraphError> {
        self.add_directed(node, target)
    }

    fn add_directed(&mut self, from: &str, to: &str) -> Result<EdgeOutcome, GraphError> {
        self.node(from)?;
        self.node(to)?;
        if from == to {
            return Err(GraphError::SelfEdge(from.to_string()));
        }
        if self.nodes[from].core.targets.iter().any(|t| t == to) {
            return Ok(EdgeOutcome::AlreadyPresent);
        }
        if self.reaches(to, from) {
            return Err(GraphError::Cycle {
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        self.nodes[from].core.targets.push(to.to_string());
        self.nodes[to].core.sources.push(from.to_string());
        Ok(EdgeOutcome::Added)
    }

    /// Whether `to` is reachable from `from` along target edges.
    pub fn reaches(&self, from: &str, to: &str) -> bool {
        let mut stack = vec![from];
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if !seen.insert(n) {
                continue;
            }
            if let Some(node) = self.nodes.get(n) {
                stack.extend(node.core.targets.iter().map(String::as_str));
            }
        }
        false
    }

    /// Records a symmetric related edge.
    pub fn add_related(&mut self, a: &str, b: &str) -> Result<EdgeOutcome, GraphError> {
        self.node(a)?;
        self.node(b)?;
        if a == b {
            return Err(GraphError::SelfEdge(a.to_string()));
        }
        if self.nodes[a].core.related.iter().any(|r| r == b) {
            return Ok(EdgeOutcome::AlreadyPresent);
        }
        self.nodes[a].core.related.push(b.to_string());
        self.nodes[b].core.related.push(a.to_string());
        Ok(EdgeOutcome::Added)
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut IndexMap<String, Node> {
        self.memo.get_mut().expect("memo lock").clear();
        &mut self.nodes
    }

    /// Computes an analytic node's result, memoized per node and dataset
    /// identity.
    ///
    /// Transform-only nodes yield the pipeline output. Nodes with a model
    /// train it on the pipeline output, or on their named dataset when there
    /// is no pipeline, and yield the in-sample evaluation.
    pub fn results(&self, name: &str, datasets: &Datasets) -> Result<Arc<AnalyticResult>, GraphError> {
        let content = self.analytic(name)?;
        let key = (name.to_string(), datasets.id());
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let computed = Arc::new(compute(name, content, datasets)?);
        let mut memo = self.memo.lock().expect("memo lock");
        Ok(Arc::clone(memo.entry(key).or_insert(computed)))
    }

    /// Checks that an analytic node's pipeline binds, without running it.
    pub fn check_analytic(&self, name: &str, datasets: &Datasets) -> Result<(), GraphError> {
        let content = self.analytic(name)?;
        if let Some(spec) = &content.transform {
            bind_pipeline(spec, datasets)?;
        }
        Ok(())
    }
}

fn compute(name: &str, content: &AnalyticContent, datasets: &Datasets) -> Result<AnalyticResult, GraphError> {
    let table = match &content.transform {
        Some(spec) => Some(bind_pipeline(spec, datasets)?.execute(datasets)?.with_name(name)),
        None => None,
    };
    let Some(model) = &content.relationship else {
        return Ok(AnalyticResult::Table(table.expect("analytic node has content")));
    };
    let training = match table {
        Some(t) => t,
        None => {
            let dataset = content
                .dataset
                .as_deref()
                .ok_or_else(|| GraphError::MissingDataset(name.to_string()))?;
            datasets
                .get(dataset)
                .ok_or_else(|| TransformError::UnresolvedSource(dataset.to_string()))?
                .clone()
        }
    };
    let trained = model.train_table(&training)?;
    let report = trained.evaluate_table(&training)?;
    Ok(AnalyticResult::Model {
        model: trained,
        report,
        training,
    })
}

#[cfg(test)]
mod tests;
