//! JSON form of a knowledge graph.

use serde::{Deserialize, Serialize};

use super::{AnalyticContent, Concept, GraphError, Instance, KnowledgeGraph, Metadata, NodeKind};
use crate::insight::{InsightContent, Members, TaskContent};
use crate::metrics::validate;
use crate::relationships::RelationshipModel;
use crate::tabular::{Attribute, Value};
use crate::transforms::TransformSpec;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    #[serde(default)]
    pub concepts: Vec<ConceptDocument>,
    #[serde(default)]
    pub instances: Vec<InstanceDocument>,
    #[serde(default)]
    pub nodes: Vec<NodeDocument>,
    #[serde(default)]
    pub edges: Vec<EdgeDocument>,
}

pub type ConceptDocument = Concept;

type EdgeList = fn(&mut super::NodeCore) -> &mut Vec<String>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetadataDocument {
    #[serde(default)]
    pub attributes: Vec<Attribute>,
    #[serde(default)]
    pub values: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub name: String,
    pub concept: String,
    #[serde(default)]
    pub metadata: MetadataDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum NodeDocument {
    Domain {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
        instance: String,
    },
    Analytic {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
        #[serde(default)]
        timestamp: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        transform: Option<TransformSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        relationship: Option<RelationshipModel>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dataset: Option<String>,
    },
    Insight {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
        domain: Members,
        analytic: Members,
    },
    Task {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
        objective: String,
        #[serde(default)]
        insights: Vec<String>,
    },
}

impl NodeDocument {
    pub fn name(&self) -> &str {
        match self {
            NodeDocument::Domain { name, .. }
            | NodeDocument::Analytic { name, .. }
            | NodeDocument::Insight { name, .. }
            | NodeDocument::Task { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeType {
    /// `from` is a source of `to`.
    SourceTarget,
    Related,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub from: String,
    pub to: String,
    #[serde(rename = "type")]
    pub edge_type: EdgeType,
}

impl EdgeDocument {
    pub fn source_target(from: &str, to: &str) -> Self {
        Self {
            from: from.to_string(),
            to: to.to_string(),
            edge_type: EdgeType::SourceTarget,
        }
    }

    pub fn related(a: &str, b: &str) -> Self {
        Self {
            from: a.to_string(),
            to: b.to_string(),
            edge_type: EdgeType::Related,
        }
    }
}

fn metadata_value(attributes: &[Attribute], key: &str, json: &serde_json::Value) -> Result<Value, GraphError> {
    use serde_json::Value as J;
    match attributes.iter().find(|a| a.name == key) {
        Some(attr) => Ok(Value::from_json(json, attr)?),
        // Kept so that validation can report the stray key.
        None => Ok(match json {
            J::Bool(b) => Value::Bool(*b),
            J::Number(n) => n.as_f64().map_or(Value::Null, Value::Number),
            J::String(s) => Value::Text(s.clone()),
            J::Null => Value::Null,
            other => Value::Text(other.to_string()),
        }),
    }
}

impl KnowledgeGraph {
    /// Serializes the graph. Source/target edges are listed from each
    /// node's targets; related edges once, from the lexicographically
    /// smaller endpoint.
    pub fn to_document(&self) -> GraphDocument {
        let concepts = self.concepts().cloned().collect();
        let instances = self
            .instances()
            .map(|i| InstanceDocument {
                name: i.name.clone(),
                concept: i.concept.clone(),
                metadata: MetadataDocument {
                    attributes: i.metadata.attributes.clone(),
                    values: i
                        .metadata
                        .values
                        .iter()
                        .map(|(k, v)| (k.clone(), v.to_json()))
                        .collect(),
                },
            })
            .collect();
        let mut edges = Vec::new();
        let nodes = self
            .nodes()
            .map(|n| {
                for t in &n.core.targets {
                    edges.push(EdgeDocument::source_target(n.name(), t));
                }
                for r in &n.core.related {
                    if n.name() < r.as_str() {
                        edges.push(EdgeDocument::related(n.name(), r));
                    }
                }
                let name = n.core.name.clone();
                let description = n.core.description.clone();
                match &n.kind {
                    NodeKind::Domain { instance } => NodeDocument::Domain {
                        name,
                        description,
                        instance: instance.clone(),
                    },
                    NodeKind::Analytic(a) => NodeDocument::Analytic {
                        name,
                        description,
                        timestamp: a.timestamp,
                        transform: a.transform.clone(),
                        relationship: a.relationship.clone(),
                        dataset: a.dataset.clone(),
                    },
                    NodeKind::Insight(i) => NodeDocument::Insight {
                        name,
                        description,
                        domain: i.domain.clone(),
                        analytic: i.analytic.clone(),
                    },
                    NodeKind::Task(t) => NodeDocument::Task {
                        name,
                        description,
                        objective: t.objective.clone(),
                        insights: t.insights.clone(),
                    },
                }
            })
            .collect();
        GraphDocument {
            concepts,
            instances,
            nodes,
            edges,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_document()).expect("graph document serializes")
    }

    /// Builds a graph from a document and validates it.
    pub fn from_document(doc: &GraphDocument) -> Result<Self, GraphError> {
        let graph = Self::from_document_unchecked(doc)?;
        let violations = validate(&graph);
        if violations.is_empty() {
            Ok(graph)
        } else {
            Err(GraphError::Invalid(violations))
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    /// Assembles a graph without checking references, edges or acyclicity;
    /// only duplicate names and malformed metadata values are rejected. An
    /// edge naming an unknown node is recorded on its known endpoint.
    pub fn from_document_unchecked(doc: &GraphDocument) -> Result<Self, GraphError> {
        let mut graph = KnowledgeGraph::new();
        for c in &doc.concepts {
            if graph.concepts.insert(c.name.clone(), c.clone()).is_some() {
                return Err(GraphError::DuplicateName {
                    kind: "concept",
                    name: c.name.clone(),
                });
            }
        }
        for i in &doc.instances {
            let attributes = i.metadata.attributes.clone();
            let values = i
                .metadata
                .values
                .iter()
                .map(|(k, v)| Ok((k.clone(), metadata_value(&attributes, k, v)?)))
                .collect::<Result<_, GraphError>>()?;
            let instance = Instance {
                name: i.name.clone(),
                concept: i.concept.clone(),
                metadata: Metadata { attributes, values },
            };
            if graph.instances.insert(i.name.clone(), instance).is_some() {
                return Err(GraphError::DuplicateName {
                    kind: "instance",
                    name: i.name.clone(),
                });
            }
        }
        for n in &doc.nodes {
            let (description, kind) = match n.clone() {
                NodeDocument::Domain {
                    description, instance, ..
                } => (description, NodeKind::Domain { instance }),
                NodeDocument::Analytic {
                    description,
                    timestamp,
                    transform,
                    relationship,
                    dataset,
                    ..
                } => (
                    description,
                    NodeKind::Analytic(AnalyticContent {
                        timestamp,
                        transform,
                        relationship,
                        dataset,
                    }),
                ),
                NodeDocument::Insight {
                    description,
                    domain,
                    analytic,
                    ..
                } => (description, NodeKind::Insight(InsightContent { domain, analytic })),
                NodeDocument::Task {
                    description,
                    objective,
                    insights,
                    ..
                } => (description, NodeKind::Task(TaskContent { objective, insights })),
            };
            graph.insert_node(n.name(), description.as_deref(), kind)?;
        }
        let nodes = graph.nodes_mut();
        for e in &doc.edges {
            let (from_list, to_list): (EdgeList, EdgeList) = match e.edge_type {
                EdgeType::SourceTarget => (|c| &mut c.targets, |c| &mut c.sources),
                EdgeType::Related => (|c| &mut c.related, |c| &mut c.related),
            };
            if let Some(n) = nodes.get_mut(&e.from) {
                let list = from_list(&mut n.core);
                if !list.contains(&e.to) {
                    list.push(e.to.clone());
                }
            }
            if let Some(n) = nodes.get_mut(&e.to) {
                let list = to_list(&mut n.core);
                if !list.contains(&e.from) {
                    list.push(e.from.clone());
                }
            }
        }
        Ok(graph)
    }
}
