//! Spec files: datasets plus every graph object, in any order.
//!
//! Loading takes two passes. The first registers every declared name and
//! rejects duplicates; the second resolves analytic nodes' transform and
//! model references and assembles the graph, which is then validated as a
//! whole. Insights, tasks and edges may therefore name objects declared
//! later in the file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use insightkit::insight::Members;
use insightkit::knowledge::{Concept, EdgeDocument, GraphDocument, InstanceDocument, KnowledgeGraph, NodeDocument};
use insightkit::metrics::validate;
use insightkit::relationships::{RelationshipKind, RelationshipModel};
use insightkit::tabular::{load_csv, Attribute, Table, TableDocument, TableError};
use insightkit::transforms::{Datasets, TransformSpec, TransformStep};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default)]
    pub datasets: Vec<DatasetDecl>,
    #[serde(default)]
    pub concepts: Vec<Concept>,
    #[serde(default)]
    pub instances: Vec<InstanceDocument>,
    #[serde(default)]
    pub domain_nodes: Vec<DomainNodeDecl>,
    #[serde(default)]
    pub transforms: Vec<NamedTransform>,
    #[serde(default)]
    pub relationship_models: Vec<RelationshipModel>,
    #[serde(default)]
    pub analytic_nodes: Vec<AnalyticNodeDecl>,
    #[serde(default)]
    pub insights: Vec<InsightDecl>,
    #[serde(default)]
    pub tasks: Vec<TaskDecl>,
    #[serde(default)]
    pub edges: Vec<EdgeDocument>,
}

/// A table read from a CSV file (relative to the spec file) or given inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<serde_json::Map<String, serde_json::Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<Vec<Attribute>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainNodeDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub instance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedTransform {
    pub name: String,
    pub sources: Vec<String>,
    pub transforms: Vec<TransformStep>,
}

/// An analytic node; `transform` and `relationship` name entries of the
/// spec's `transforms` and `relationshipModels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticNodeDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub timestamp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relationship: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsightDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub domain: Members,
    pub analytic: Members,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub objective: String,
    #[serde(default)]
    pub insights: Vec<String>,
}

fn duplicate(kind: &str, name: &str) -> CliError {
    CliError::Semantic(format!("duplicate {kind} name `{name}`"))
}

fn unique_names<'a>(kind: &str, names: impl Iterator<Item = &'a str>) -> Result<BTreeSet<&'a str>, CliError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(duplicate(kind, n));
        }
    }
    Ok(seen)
}

fn table_error(e: TableError) -> CliError {
    match e {
        TableError::Io { .. } => CliError::Io(e.to_string()),
        other => CliError::Parse(other.to_string()),
    }
}

/// Parses a `name=path` dataset override.
pub fn parse_data_flag(raw: &str) -> Result<(String, PathBuf), String> {
    match raw.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected name=path, found `{raw}`")),
    }
}

/// Loads a CSV file under `name`, reporting I/O and parse failures apart.
pub fn load_named_csv(name: &str, path: &Path, schema: Option<&[Attribute]>) -> Result<Table, CliError> {
    Ok(load_csv(path, schema).map_err(table_error)?.with_name(name))
}

impl SpecFile {
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("invalid spec file: {e}")))
    }

    /// Reads a spec file, returning it with the directory its dataset paths
    /// are relative to.
    pub fn read(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read `{}`: {e}", path.display())))?;
        let spec = Self::from_json_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((spec, base))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec file serializes")
    }

    /// Forces every isolation forest model onto `seed`.
    pub fn apply_seed(&mut self, seed: u64) {
        for m in &mut self.relationship_models {
            if m.kind == RelationshipKind::IsolationForest {
                m.hyperparameters.seed = Some(seed);
            }
        }
    }

    /// Resolves references and lays the graph out as a document. Fails on
    /// duplicate names and on analytic nodes naming an unknown transform or
    /// model; every other dangling reference is left for validation.
    pub fn to_document(&self) -> Result<GraphDocument, CliError> {
        unique_names("dataset", self.datasets.iter().map(|d| d.name.as_str()))?;
        unique_names("concept", self.concepts.iter().map(|c| c.name.as_str()))?;
        unique_names("instance", self.instances.iter().map(|i| i.name.as_str()))?;
        let transforms: BTreeMap<&str, &NamedTransform> =
            self.transforms.iter().map(|t| (t.name.as_str(), t)).collect();
        if transforms.len() != self.transforms.len() {
            unique_names("transform", self.transforms.iter().map(|t| t.name.as_str()))?;
        }
        let models: BTreeMap<&str, &RelationshipModel> =
            self.relationship_models.iter().map(|m| (m.name.as_str(), m)).collect();
        if models.len() != self.relationship_models.len() {
            unique_names(
                "relationship model",
                self.relationship_models.iter().map(|m| m.name.as_str()),
            )?;
        }
        let node_names = self
            .domain_nodes
            .iter()
            .map(|n| n.name.as_str())
            .chain(self.analytic_nodes.iter().map(|n| n.name.as_str()))
            .chain(self.insights.iter().map(|n| n.name.as_str()))
            .chain(self.tasks.iter().map(|n| n.name.as_str()));
        unique_names("node", node_names)?;

        let mut nodes = Vec::new();
        for d in &self.domain_nodes {
            nodes.push(NodeDocument::Domain {
                name: d.name.clone(),
                description: d.description.clone(),
                instance: d.instance.clone(),
            });
        }
        for a in &self.analytic_nodes {
            let transform = match &a.transform {
                Some(t) => {
                    let named = transforms.get(t.as_str()).ok_or_else(|| {
                        CliError::Semantic(format!("analytic node `{}` names unknown transform `{t}`", a.name))
                    })?;
                    let sources: Vec<&str> = named.sources.iter().map(String::as_str).collect();
                    Some(TransformSpec::new(&sources, named.transforms.clone()))
                }
                None => None,
            };
            let relationship = match &a.relationship {
                Some(r) => Some(models.get(r.as_str()).map(|m| (*m).clone()).ok_or_else(|| {
                    CliError::Semantic(format!(
                        "analytic node `{}` names unknown relationship model `{r}`",
                        a.name
                    ))
                })?),
                None => None,
            };
            nodes.push(NodeDocument::Analytic {
                name: a.name.clone(),
                description: a.description.clone(),
                timestamp: a.timestamp,
                transform,
                relationship,
                dataset: a.dataset.clone(),
            });
        }
        for i in &self.insights {
            nodes.push(NodeDocument::Insight {
                name: i.name.clone(),
                description: i.description.clone(),
                domain: i.domain.clone(),
                analytic: i.analytic.clone(),
            });
        }
        for t in &self.tasks {
            nodes.push(NodeDocument::Task {
                name: t.name.clone(),
                description: t.description.clone(),
                objective: t.objective.clone(),
                insights: t.insights.clone(),
            });
        }
        Ok(GraphDocument {
            concepts: self.concepts.clone(),
            instances: self.instances.clone(),
            nodes,
            edges: self.edges.clone(),
        })
    }

    /// Builds and validates the graph; the first violation is the error.
    pub fn build_graph(&self) -> Result<KnowledgeGraph, CliError> {
        let graph = KnowledgeGraph::from_document_unchecked(&self.to_document()?)?;
        match validate(&graph).into_iter().next() {
            None => Ok(graph),
            Some(v) => Err(CliError::Semantic(format!("invalid spec: {v}"))),
        }
    }

    /// Loads every declared dataset, then applies `overrides`, which replace
    /// or add tables by name.
    pub fn load_datasets(&self, base: &Path, overrides: &[(String, PathBuf)]) -> Result<Datasets, CliError> {
        let mut datasets = Datasets::new();
        for d in &self.datasets {
            if overrides.iter().any(|(name, _)| *name == d.name) {
                continue;
            }
            let table = match (&d.path, &d.rows) {
                (Some(path), None) => load_named_csv(&d.name, &base.join(path), d.schema.as_deref())?,
                (None, Some(rows)) => {
                    let schema = d
                        .schema
                        .clone()
                        .ok_or_else(|| CliError::Parse(format!("inline dataset `{}` needs a schema", d.name)))?;
                    TableDocument {
                        name: d.name.clone(),
                        schema,
                        rows: rows.clone(),
                    }
                    .into_table()
                    .map_err(|e| CliError::Parse(format!("dataset `{}`: {e}", d.name)))?
                }
                _ => {
                    return Err(CliError::Parse(format!(
                        "dataset `{}` needs exactly one of `path` or `rows`",
                        d.name
                    )))
                }
            };
            datasets.insert(table);
        }
        for (name, path) in overrides {
            let schema = self
                .datasets
                .iter()
                .find(|d| d.name == *name)
                .and_then(|d| d.schema.as_deref());
            datasets.insert(load_named_csv(name, path, schema)?);
        }
        Ok(datasets)
    }
}
