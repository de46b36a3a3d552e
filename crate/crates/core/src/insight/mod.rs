//! Insights, objectives and tasks.
//!
//! An insight node links domain nodes to analytic nodes. Any wildcard in it,
//! whether a whole member list or a `*` inside a member's transform or model
//! template, makes it an objective: a constraint that fully specified
//! insights may satisfy. A task pairs an objective with the insights offered
//! for it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::knowledge::{EdgeOutcome, GraphError, KnowledgeGraph, NodeKind};
use crate::relationships::RelationshipModel;
use crate::tabular::WILDCARD;
use crate::transforms::TransformSpec;

/// A member list, or the wildcard standing for any list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Members {
    Wildcard,
    List(Vec<String>),
}

impl Members {
    pub fn list(names: &[&str]) -> Self {
        Members::List(names.iter().map(|s| s.to_string()).collect())
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, Members::Wildcard)
    }

    pub fn names(&self) -> &[String] {
        match self {
            Members::Wildcard => &[],
            Members::List(v) => v,
        }
    }
}

impl fmt::Display for Members {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Members::Wildcard => f.write_str(WILDCARD),
            Members::List(v) => write!(f, "[{}]", v.join(", ")),
        }
    }
}

impl Serialize for Members {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Members::Wildcard => s.serialize_str(WILDCARD),
            Members::List(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Members {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            List(Vec<String>),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) if s == WILDCARD => Ok(Members::Wildcard),
            Raw::Text(s) => Err(de::Error::custom(format!(
                "expected \"*\" or a list of names, found \"{s}\""
            ))),
            Raw::List(v) => Ok(Members::List(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsightContent {
    pub domain: Members,
    pub analytic: Members,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskContent {
    pub objective: String,
    pub insights: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TaskStatus {
    /// No insights attached.
    Open,
    /// Some attached insight satisfies the objective.
    Satisfied,
    /// Insights attached, none satisfies the objective: a null result.
    ClosedNull,
}

impl fmt::Display for TaskStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskStatus::Open => "open",
            TaskStatus::Satisfied => "satisfied",
            TaskStatus::ClosedNull => "closedNull",
        })
    }
}

/// A spec that can appear as a template.
#[derive(Debug, Clone, Copy)]
pub enum SpecRef<'a> {
    Transform(&'a TransformSpec),
    Relationship(&'a RelationshipModel),
}

/// Structural equality where every wildcard in `template` matches anything
/// at its position in `concrete`.
pub fn match_with_wildcards(template: SpecRef<'_>, concrete: SpecRef<'_>) -> Result<bool, GraphError> {
    match (template, concrete) {
        (SpecRef::Transform(t), SpecRef::Transform(c)) => Ok(t.matches(c)),
        (SpecRef::Relationship(t), SpecRef::Relationship(c)) => Ok(t.matches(c)),
        _ => Err(GraphError::SpecKindMismatch),
    }
}

/// Values substituted for an objective's wildcards by [`KnowledgeGraph::complete`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    /// Replaces a wildcard domain list.
    pub domain: Option<Vec<String>>,
    /// Replaces a wildcard analytic list.
    pub analytic: Option<Vec<String>>,
    /// Replaces template analytic members (nodes whose specs contain
    /// wildcards) with concrete analytic nodes.
    pub members: BTreeMap<String, String>,
}

impl Bindings {
    pub fn analytic(names: &[&str]) -> Self {
        Self {
            analytic: Some(names.iter().map(|s| s.to_string()).collect()),
            ..Default::default()
        }
    }

    pub fn domain(names: &[&str]) -> Self {
        Self {
            domain: Some(names.iter().map(|s| s.to_string()).collect()),
            ..Default::default()
        }
    }
}

/// Finds a matching that assigns each left vertex a distinct right vertex.
fn has_injective_matching(edges: &[Vec<usize>], right: usize) -> bool {
    fn augment(u: usize, edges: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &edges[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, edges, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    (0..edges.len()).all(|u| augment(u, edges, &mut vec![false; right], &mut owner))
}

impl KnowledgeGraph {
    pub fn insight(&self, name: &str) -> Result<&InsightContent, GraphError> {
        self.node(name)?.as_insight().ok_or_else(|| GraphError::WrongKind {
            name: name.to_string(),
            expected: "insight",
        })
    }

    pub fn task(&self, name: &str) -> Result<&TaskContent, GraphError> {
        self.node(name)?.as_task().ok_or_else(|| GraphError::WrongKind {
            name: name.to_string(),
            expected: "task",
        })
    }

    /// Whether an analytic node carries a wildcard template.
    fn is_template_member(&self, name: &str) -> bool {
        self.analytic(name).is_ok_and(|a| a.has_wildcard())
    }

    /// Whether `content` contains a wildcard anywhere, looking through
    /// resolvable analytic members.
    pub(crate) fn content_has_wildcard(&self, content: &InsightContent) -> bool {
        content.domain.is_wildcard()
            || content.analytic.is_wildcard()
            || content.analytic.names().iter().any(|m| self.is_template_member(m))
    }

    fn check_concrete_members(&self, node: &str, content: &InsightContent) -> Result<(), GraphError> {
        for (list, names, expected) in [
            ("domain", content.domain.names(), "domain"),
            ("analytic", content.analytic.names(), "analytic"),
        ] {
            if names.is_empty() {
                return Err(GraphError::EmptyMembers {
                    node: node.to_string(),
                    list,
                });
            }
            for m in names {
                if self.node(m)?.kind_name() != expected {
                    return Err(GraphError::WrongKind {
                        name: m.clone(),
                        expected,
                    });
                }
            }
        }
        Ok(())
    }

    /// Registers an insight, or an objective when any wildcard is present.
    /// Objectives may name members that do not (yet) exist.
    pub fn create_insight(
        &mut self,
        name: &str,
        domain: Members,
        analytic: Members,
        description: Option<&str>,
    ) -> Result<&crate::knowledge::Node, GraphError> {
        let content = InsightContent { domain, analytic };
        if !self.content_has_wildcard(&content) {
            self.check_concrete_members(name, &content)?;
        }
        self.insert_node(name, description, NodeKind::Insight(content))
    }

    /// True iff the insight has no wildcard at any position and all of its
    /// members resolve.
    pub fn is_fully_specified(&self, name: &str) -> Result<bool, GraphError> {
        let content = self.insight(name)?;
        Ok(!self.content_has_wildcard(content) && self.check_concrete_members(name, content).is_ok())
    }

    pub fn is_objective(&self, name: &str) -> Result<bool, GraphError> {
        Ok(!self.is_fully_specified(name)?)
    }

    /// Whether objective member `template` is met by insight member
    /// `concrete`: the same node, or analytic content matching the
    /// template's declared specs.
    fn member_matches(&self, template: &str, concrete: &str) -> bool {
        if template == concrete {
            return true;
        }
        match (self.analytic(template), self.analytic(concrete)) {
            (Ok(t), Ok(c)) => t.matches(c),
            _ => false,
        }
    }

    /// Whether a fully specified insight meets an objective's constraints:
    /// the objective's domain nodes are a subset of the insight's, and its
    /// analytic members can each be matched to a distinct insight member.
    pub fn satisfies(&self, insight: &str, objective: &str) -> Result<bool, GraphError> {
        if !self.is_fully_specified(insight)? {
            return Err(GraphError::NotFullySpecified(insight.to_string()));
        }
        let have = self.insight(insight)?;
        let want = self.insight(objective)?;
        if let Members::List(domains) = &want.domain {
            let available: BTreeSet<&String> = have.domain.names().iter().collect();
            if !domains.iter().all(|d| available.contains(d)) {
                return Ok(false);
            }
        }
        if let Members::List(wanted) = &want.analytic {
            let offered = have.analytic.names();
            let edges: Vec<Vec<usize>> = wanted
                .iter()
                .map(|w| {
                    (0..offered.len())
                        .filter(|&j| self.member_matches(w, &offered[j]))
                        .collect()
                })
                .collect();
            if !has_injective_matching(&edges, offered.len()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Fully specified insights satisfying `objective`, sorted by name.
    pub fn matching_insights(&self, objective: &str) -> Result<Vec<String>, GraphError> {
        self.insight(objective)?;
        let mut out = Vec::new();
        for node in self.nodes() {
            if node.as_insight().is_some()
                && self.is_fully_specified(node.name())?
                && self.satisfies(node.name(), objective)?
            {
                out.push(node.name().to_string());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Registers a new insight `name` that fills `objective`'s wildcards
    /// from `bindings`, linked with the objective as its source.
    pub fn complete(
        &mut self,
        objective: &str,
        bindings: &Bindings,
        name: &str,
    ) -> Result<&crate::knowledge::Node, GraphError> {
        let content = self.insight(objective)?.clone();
        let domain = match (&content.domain, &bindings.domain) {
            (Members::Wildcard, Some(bound)) => bound.clone(),
            (Members::Wildcard, None) => return Err(GraphError::UncoveredWildcard("domain".into())),
            (Members::List(_), Some(_)) => return Err(GraphError::StrayBinding("domain".into())),
            (Members::List(list), None) => list.clone(),
        };
        let analytic = match (&content.analytic, &bindings.analytic) {
            (Members::Wildcard, Some(bound)) => {
                if let Some(stray) = bindings.members.keys().next() {
                    return Err(GraphError::StrayBinding(stray.clone()));
                }
                bound.clone()
            }
            (Members::Wildcard, None) => return Err(GraphError::UncoveredWildcard("analytic".into())),
            (Members::List(_), Some(_)) => return Err(GraphError::StrayBinding("analytic".into())),
            (Members::List(list), None) => {
                let mut used = BTreeSet::new();
                let mut out = Vec::with_capacity(list.len());
                for member in list {
                    if !self.is_template_member(member) {
                        out.push(member.clone());
                        continue;
                    }
                    let bound = bindings
                        .members
                        .get(member)
                        .ok_or_else(|| GraphError::UncoveredWildcard(member.clone()))?;
                    if !self.member_matches(member, bound) {
                        return Err(GraphError::BindingMismatch {
                            template: member.clone(),
                            concrete: bound.clone(),
                        });
                    }
                    used.insert(member);
                    out.push(bound.clone());
                }
                if let Some(stray) = bindings.members.keys().find(|k| !used.contains(k)) {
                    return Err(GraphError::StrayBinding(stray.clone()));
                }
                out
            }
        };
        let completed = InsightContent {
            domain: Members::List(domain),
            analytic: Members::List(analytic),
        };
        if self.content_has_wildcard(&completed) {
            return Err(GraphError::NotFullySpecified(name.to_string()));
        }
        self.check_concrete_members(name, &completed)?;
        let description = self.node(objective)?.core.description.clone();
        self.insert_node(name, description.as_deref(), NodeKind::Insight(completed))?;
        self.add_source(name, objective)?;
        self.node(name)
    }

    /// Registers a task pairing `objective` with fully specified insights.
    pub fn create_task(
        &mut self,
        name: &str,
        objective: &str,
        insights: &[&str],
        description: Option<&str>,
    ) -> Result<&crate::knowledge::Node, GraphError> {
        self.insight(objective)?;
        for i in insights {
            if !self.is_fully_specified(i)? {
                return Err(GraphError::NotFullySpecified(i.to_string()));
            }
        }
        let mut unique: Vec<String> = Vec::new();
        for i in insights {
            if !unique.iter().any(|u| u == i) {
                unique.push(i.to_string());
            }
        }
        self.insert_node(
            name,
            description,
            NodeKind::Task(TaskContent {
                objective: objective.to_string(),
                insights: unique,
            }),
        )
    }

    /// Offers another fully specified insight for a task.
    pub fn attach_insight(&mut self, task: &str, insight: &str) -> Result<EdgeOutcome, GraphError> {
        self.task(task)?;
        if !self.is_fully_specified(insight)? {
            return Err(GraphError::NotFullySpecified(insight.to_string()));
        }
        let Some(NodeKind::Task(content)) = self.nodes_mut().get_mut(task).map(|n| &mut n.kind) else {
            unreachable!("checked above");
        };
        if content.insights.iter().any(|i| i == insight) {
            return Ok(EdgeOutcome::AlreadyPresent);
        }
        content.insights.push(insight.to_string());
        Ok(EdgeOutcome::Added)
    }

    pub fn task_status(&self, task: &str) -> Result<TaskStatus, GraphError> {
        let content = self.task(task)?;
        if content.insights.is_empty() {
            return Ok(TaskStatus::Open);
        }
        for i in &content.insights {
            if self.satisfies(i, &content.objective)? {
                return Ok(TaskStatus::Satisfied);
            }
        }
        Ok(TaskStatus::ClosedNull)
    }
}

#[cfg(test)]
mod tests;
