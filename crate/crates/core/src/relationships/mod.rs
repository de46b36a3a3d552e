//! Trainable statistical models over table attributes.
//!
//! A [`RelationshipModel`] names its input and output attributes and a model
//! family. Training returns a new, immutable model value; the untrained value
//! doubles as a template whose attributes may be the `*` wildcard.

mod bayes;
mod density;
mod forest;
mod knn;
mod linear;
mod report;
mod tree;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tabular::{AttributeType, Record, Table, Value};
use crate::transforms::AttrRef;

pub use report::{EvaluationReport, Metrics};
pub use tree::{SplitInfo, SplitRule};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model `{0}` is not trained")]
    NotTrained(String),
    #[error("no usable rows ({dropped} dropped for nulls)")]
    NoUsableRows { dropped: usize },
    #[error("training set has a single class `{0}`")]
    SingleClass(String),
    #[error("need at least {needed} usable rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("invalid model `{name}`: {detail}")]
    InvalidModel { name: String, detail: String },
    #[error("attribute `{attribute}` must be {expected}, found {found}")]
    TypeMismatch {
        attribute: String,
        expected: String,
        found: String,
    },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("input `{0}` is null")]
    NullInput(String),
    #[error("model `{0}` contains a wildcard and cannot be trained")]
    WildcardPresent(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("{operation} is not supported by {kind} models")]
    Unsupported {
        operation: &'static str,
        kind: RelationshipKind,
    },
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("invalid model spec: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RelationshipKind {
    LinearRegression,
    DecisionTreeClassification,
    KnnClassification,
    NaiveBayesClassification,
    KernelDensity,
    NormalDistribution,
    IsolationForest,
}

impl RelationshipKind {
    pub const ALL: [RelationshipKind; 7] = [
        RelationshipKind::LinearRegression,
        RelationshipKind::DecisionTreeClassification,
        RelationshipKind::KnnClassification,
        RelationshipKind::NaiveBayesClassification,
        RelationshipKind::KernelDensity,
        RelationshipKind::NormalDistribution,
        RelationshipKind::IsolationForest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationshipKind::LinearRegression => "linearRegression",
            RelationshipKind::DecisionTreeClassification => "decisionTreeClassification",
            RelationshipKind::KnnClassification => "knnClassification",
            RelationshipKind::NaiveBayesClassification => "naiveBayesClassification",
            RelationshipKind::KernelDensity => "kernelDensity",
            RelationshipKind::NormalDistribution => "normalDistribution",
            RelationshipKind::IsolationForest => "isolationForest",
        }
    }

    pub fn is_classifier(self) -> bool {
        matches!(
            self,
            RelationshipKind::DecisionTreeClassification
                | RelationshipKind::KnnClassification
                | RelationshipKind::NaiveBayesClassification
        )
    }

    pub fn is_scorer(self) -> bool {
        matches!(
            self,
            RelationshipKind::KernelDensity | RelationshipKind::NormalDistribution | RelationshipKind::IsolationForest
        )
    }

    pub fn has_output(self) -> bool {
        !self.is_scorer()
    }
}

impl fmt::Display for RelationshipKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const DEFAULT_MAX_DEPTH: usize = 8;
pub const DEFAULT_MIN_LEAF: usize = 1;
pub const DEFAULT_K: usize = 3;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_TREES: usize = 100;
pub const DEFAULT_SUBSAMPLE: usize = 256;
pub const DEFAULT_SEED: u64 = 42;

/// Kind-specific settings. Unset fields take the documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Hyperparameters {
    /// Decision tree depth limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    /// Minimum rows per decision tree leaf.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_leaf: Option<usize>,
    /// Neighbour count for KNN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Laplace smoothing for naive Bayes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Fixed KDE bandwidth, overriding Silverman's rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    /// Isolation forest size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trees: Option<usize>,
    /// Isolation forest per-tree sample size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample: Option<usize>,
    /// Isolation forest RNG seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Hyperparameters {
    fn validate(&self, kind: RelationshipKind) -> Result<(), ModelError> {
        use RelationshipKind::*;
        let allowed: &[&str] = match kind {
            DecisionTreeClassification => &["maxDepth", "minLeaf"],
            KnnClassification => &["k"],
            NaiveBayesClassification => &["alpha"],
            KernelDensity => &["bandwidth"],
            IsolationForest => &["trees", "subsample", "seed"],
            LinearRegression | NormalDistribution => &[],
        };
        let set: [(&str, bool); 8] = [
            ("maxDepth", self.max_depth.is_some()),
            ("minLeaf", self.min_leaf.is_some()),
            ("k", self.k.is_some()),
            ("alpha", self.alpha.is_some()),
            ("bandwidth", self.bandwidth.is_some()),
            ("trees", self.trees.is_some()),
            ("subsample", self.subsample.is_some()),
            ("seed", self.seed.is_some()),
        ];
        if let Some((name, _)) = set.iter().find(|(name, present)| *present && !allowed.contains(name)) {
            return Err(ModelError::InvalidHyperparameter(format!(
                "`{name}` does not apply to {kind}"
            )));
        }
        let positive = |name: &str, v: Option<usize>| match v {
            Some(0) => Err(ModelError::InvalidHyperparameter(format!(
                "`{name}` must be at least 1"
            ))),
            _ => Ok(()),
        };
        positive("maxDepth", self.max_depth)?;
        positive("minLeaf", self.min_leaf)?;
        positive("k", self.k)?;
        positive("trees", self.trees)?;
        if matches!(self.subsample, Some(0 | 1)) {
            return Err(ModelError::InvalidHyperparameter(
                "`subsample` must be at least 2".into(),
            ));
        }
        for (name, v) in [("alpha", self.alpha), ("bandwidth", self.bandwidth)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(ModelError::InvalidHyperparameter(format!(
                        "`{name}` must be a positive number"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A resolved model attribute: name and type as seen at training time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelColumn {
    pub name: String,
    pub attribute_type: AttributeType,
}

/// One model input value after type checking.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Feature {
    Num(f64),
    Cat(Value),
}

impl Feature {
    fn num(&self) -> f64 {
        match self {
            Feature::Num(x) => *x,
            Feature::Cat(_) => unreachable!("numeric feature expected"),
        }
    }
}

fn is_numeric(t: AttributeType) -> bool {
    matches!(t, AttributeType::Quantitative | AttributeType::Temporal)
}

fn to_feature(column: &ModelColumn, value: &Value) -> Result<Feature, ModelError> {
    let mismatch = || ModelError::TypeMismatch {
        attribute: column.name.clone(),
        expected: column.attribute_type.to_string(),
        found: value.tag().to_string(),
    };
    match (column.attribute_type, value) {
        (_, Value::Null) => Err(ModelError::NullInput(column.name.clone())),
        (AttributeType::Quantitative, Value::Number(x)) => Ok(Feature::Num(*x)),
        (AttributeType::Temporal, Value::Date(_)) => Ok(Feature::Num(value.numeric().ok_or_else(mismatch)?)),
        (AttributeType::Nominal | AttributeType::Ordinal, Value::Text(_) | Value::Bool(_)) => {
            Ok(Feature::Cat(value.clone()))
        }
        _ => Err(mismatch()),
    }
}

/// Usable training or evaluation rows, already type checked.
struct Frame {
    inputs: Vec<ModelColumn>,
    output: Option<ModelColumn>,
    features: Vec<Vec<Feature>>,
    targets: Vec<Value>,
    dropped: usize,
}

impl Frame {
    fn numeric_column(&self, j: usize) -> Vec<f64> {
        self.features.iter().map(|r| r[j].num()).collect()
    }

    fn numeric_targets(&self) -> Vec<f64> {
        self.targets
            .iter()
            .map(|v| v.as_f64().expect("numeric target"))
            .collect()
    }
}

#[derive(Debug, Clone)]
enum FittedModel {
    Linear(linear::LinearFit),
    Tree(tree::TreeFit),
    Knn(knn::KnnFit),
    Bayes(bayes::BayesFit),
    Normal(density::NormalFit),
    Kde(density::KdeFit),
    Forest(forest::ForestFit),
}

#[derive(Debug)]
struct Fitted {
    inputs: Vec<ModelColumn>,
    output: Option<ModelColumn>,
    classes: Vec<Value>,
    rows: usize,
    dropped: usize,
    model: FittedModel,
}

/// A named model over named attributes. See the module docs.
#[derive(Debug, Clone)]
pub struct RelationshipModel {
    pub name: String,
    pub kind: RelationshipKind,
    pub inputs: Vec<AttrRef>,
    pub output: Option<AttrRef>,
    pub hyperparameters: Hyperparameters,
    fitted: Option<Arc<Fitted>>,
}

impl PartialEq for RelationshipModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.kind == other.kind
            && self.inputs == other.inputs
            && self.output == other.output
            && self.hyperparameters == other.hyperparameters
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    name: String,
    kind: RelationshipKind,
    inputs: Vec<AttrRef>,
    #[serde(default)]
    output: Option<AttrRef>,
    #[serde(default)]
    hyperparameters: Hyperparameters,
}

impl Serialize for RelationshipModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModelDocument {
            name: self.name.clone(),
            kind: self.kind,
            inputs: self.inputs.clone(),
            output: self.output.clone(),
            hyperparameters: self.hyperparameters.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RelationshipModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = ModelDocument::deserialize(d)?;
        Ok(RelationshipModel {
            name: doc.name,
            kind: doc.kind,
            inputs: doc.inputs,
            output: doc.output,
            hyperparameters: doc.hyperparameters,
            fitted: None,
        })
    }
}

impl RelationshipModel {
    pub fn new(name: impl Into<String>, kind: RelationshipKind, inputs: &[&str], output: Option<&str>) -> Self {
        Self {
            name: name.into(),
            kind,
            inputs: inputs.iter().map(|&s| AttrRef::name(s)).collect(),
            output: output.map(AttrRef::name),
            hyperparameters: Hyperparameters::default(),
            fitted: None,
        }
    }

    pub fn with_hyperparameters(mut self, hyperparameters: Hyperparameters) -> Self {
        self.hyperparameters = hyperparameters;
        self.fitted = None;
        self
    }

    pub fn is_trained(&self) -> bool {
        self.fitted.is_some()
    }

    pub fn has_wildcard(&self) -> bool {
        self.inputs.iter().chain(self.output.iter()).any(AttrRef::is_wildcard)
    }

    /// Template matching: same kind and hyperparameters, attributes equal or
    /// wildcarded on the template side. Model names are not compared.
    pub fn matches(&self, concrete: &RelationshipModel) -> bool {
        self.kind == concrete.kind
            && self.hyperparameters == concrete.hyperparameters
            && self.inputs.len() == concrete.inputs.len()
            && self.inputs.iter().zip(&concrete.inputs).all(|(t, c)| t.matches(c))
            && match (&self.output, &concrete.output) {
                (None, None) => true,
                (Some(t), Some(c)) => t.matches(c),
                _ => false,
            }
    }

    /// Names of all attributes the model reads.
    pub fn used_attributes(&self) -> Vec<&str> {
        self.inputs
            .iter()
            .chain(self.output.iter())
            .filter_map(AttrRef::as_name)
            .collect()
    }

    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("model spec serializes")
    }

    /// Checks arity and attribute constraints that do not depend on data.
    pub fn validate(&self) -> Result<(), ModelError> {
        let invalid = |detail: &str| ModelError::InvalidModel {
            name: self.name.clone(),
            detail: detail.to_string(),
        };
        if self.inputs.is_empty() {
            return Err(invalid("at least one input attribute is required"));
        }
        match (self.kind.has_output(), &self.output) {
            (true, None) => return Err(invalid("an output attribute is required")),
            (false, Some(_)) => return Err(invalid("this kind takes no output attribute")),
            _ => {}
        }
        if matches!(
            self.kind,
            RelationshipKind::KernelDensity | RelationshipKind::NormalDistribution
        ) && self.inputs.len() != 1
        {
            return Err(invalid("exactly one input attribute is required"));
        }
        let names: Vec<&str> = self.used_attributes();
        let unique: BTreeSet<&str> = names.iter().copied().collect();
        if unique.len() != names.len() {
            return Err(invalid("attributes must be distinct"));
        }
        self.hyperparameters.validate(self.kind)
    }

    fn check_types(&self, inputs: &[ModelColumn], output: Option<&ModelColumn>) -> Result<(), ModelError> {
        let require = |c: &ModelColumn, ok: bool, expected: &str| {
            if ok {
                Ok(())
            } else {
                Err(ModelError::TypeMismatch {
                    attribute: c.name.clone(),
                    expected: expected.to_string(),
                    found: c.attribute_type.to_string(),
                })
            }
        };
        match self.kind {
            RelationshipKind::LinearRegression => {
                for c in inputs.iter().chain(output) {
                    require(c, c.attribute_type == AttributeType::Quantitative, "quantitative")?;
                }
            }
            k if k.is_classifier() => {
                let out = output.expect("validated");
                require(out, out.attribute_type == AttributeType::Nominal, "nominal")?;
            }
            _ => {
                for c in inputs {
                    require(c, c.attribute_type == AttributeType::Quantitative, "quantitative")?;
                }
            }
        }
        Ok(())
    }

    fn fitted(&self) -> Result<&Fitted, ModelError> {
        self.fitted
            .as_deref()
            .ok_or_else(|| ModelError::NotTrained(self.name.clone()))
    }

    /// Resolves the model's attributes against a table schema.
    fn resolve_table(&self, table: &Table) -> Result<(Vec<ModelColumn>, Option<ModelColumn>), ModelError> {
        let column = |r: &AttrRef| {
            let name = r
                .as_name()
                .ok_or_else(|| ModelError::WildcardPresent(self.name.clone()))?;
            let attr = table
                .attribute(name)
                .ok_or_else(|| ModelError::UnknownAttribute(name.to_string()))?;
            Ok(ModelColumn {
                name: name.to_string(),
                attribute_type: attr.attribute_type,
            })
        };
        let inputs = self.inputs.iter().map(column).collect::<Result<Vec<_>, ModelError>>()?;
        let output = self.output.as_ref().map(column).transpose()?;
        Ok((inputs, output))
    }

    /// Resolves attribute types from record values: numbers are
    /// quantitative, dates temporal, strings and booleans nominal.
    fn resolve_records(&self, rows: &[Record]) -> Result<(Vec<ModelColumn>, Option<ModelColumn>), ModelError> {
        let column = |r: &AttrRef| {
            let name = r
                .as_name()
                .ok_or_else(|| ModelError::WildcardPresent(self.name.clone()))?;
            let mut seen = false;
            let mut first = None;
            for row in rows {
                if let Some(v) = row.get(name) {
                    seen = true;
                    if !v.is_null() {
                        first = Some(v);
                        break;
                    }
                }
            }
            if !seen && !rows.is_empty() {
                return Err(ModelError::UnknownAttribute(name.to_string()));
            }
            let attribute_type = match first {
                Some(Value::Number(_)) => AttributeType::Quantitative,
                Some(Value::Date(_)) => AttributeType::Temporal,
                _ => AttributeType::Nominal,
            };
            Ok(ModelColumn {
                name: name.to_string(),
                attribute_type,
            })
        };
        let inputs = self.inputs.iter().map(column).collect::<Result<Vec<_>, ModelError>>()?;
        let output = self.output.as_ref().map(column).transpose()?;
        Ok((inputs, output))
    }

    fn frame<'a>(
        &self,
        inputs: Vec<ModelColumn>,
        output: Option<ModelColumn>,
        rows: impl Iterator<Item = Vec<&'a Value>>,
    ) -> Result<Frame, ModelError> {
        let mut frame = Frame {
            inputs,
            output,
            features: Vec::new(),
            targets: Vec::new(),
            dropped: 0,
        };
        let n_in = frame.inputs.len();
        for row in rows {
            if row.iter().any(|v| v.is_null()) {
                frame.dropped += 1;
                continue;
            }
            let features = frame
                .inputs
                .iter()
                .zip(&row)
                .map(|(c, v)| to_feature(c, v))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(out) = &frame.output {
                let target = row[n_in];
                let ok = match out.attribute_type {
                    AttributeType::Quantitative => matches!(target, Value::Number(_)),
                    _ => matches!(target, Value::Text(_) | Value::Bool(_)),
                };
                if !ok {
                    return Err(ModelError::TypeMismatch {
                        attribute: out.name.clone(),
                        expected: out.attribute_type.to_string(),
                        found: target.tag().to_string(),
                    });
                }
                frame.targets.push(target.clone());
            }
            frame.features.push(features);
        }
        if frame.features.is_empty() {
            return Err(ModelError::NoUsableRows { dropped: frame.dropped });
        }
        Ok(frame)
    }

    fn table_frame(
        &self,
        table: &Table,
        inputs: Vec<ModelColumn>,
        output: Option<ModelColumn>,
    ) -> Result<Frame, ModelError> {
        let idx: Vec<usize> = inputs
            .iter()
            .chain(output.iter())
            .map(|c| {
                table
                    .column_index(&c.name)
                    .ok_or_else(|| ModelError::UnknownAttribute(c.name.clone()))
            })
            .collect::<Result<_, _>>()?;
        let rows = table.rows().iter().map(|r| idx.iter().map(|&i| &r[i]).collect());
        self.frame(inputs, output, rows)
    }

    fn record_frame(
        &self,
        records: &[Record],
        inputs: Vec<ModelColumn>,
        output: Option<ModelColumn>,
    ) -> Result<Frame, ModelError> {
        const NULL: Value = Value::Null;
        let names: Vec<String> = inputs.iter().chain(output.iter()).map(|c| c.name.clone()).collect();
        let rows = records
            .iter()
            .map(|r| names.iter().map(|n| r.get(n).unwrap_or(&NULL)).collect());
        self.frame(inputs, output, rows)
    }

    /// Trains on the rows of `table`, returning a new trained model.
    pub fn train_table(&self, table: &Table) -> Result<RelationshipModel, ModelError> {
        self.validate()?;
        let (inputs, output) = self.resolve_table(table)?;
        self.check_types(&inputs, output.as_ref())?;
        let frame = self.table_frame(table, inputs, output)?;
        self.fit(frame)
    }

    /// Trains on name-keyed records, inferring attribute types from values.
    pub fn train(&self, rows: &[Record]) -> Result<RelationshipModel, ModelError> {
        self.validate()?;
        let (inputs, output) = self.resolve_records(rows)?;
        self.check_types(&inputs, output.as_ref())?;
        let frame = self.record_frame(rows, inputs, output)?;
        self.fit(frame)
    }

    fn fit(&self, frame: Frame) -> Result<RelationshipModel, ModelError> {
        let hp = &self.hyperparameters;
        let n = frame.features.len();
        let mut classes = Vec::new();
        let mut labels = Vec::new();
        if self.kind.is_classifier() {
            classes = frame
                .targets
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if classes.len() < 2 {
                return Err(ModelError::SingleClass(classes[0].to_string()));
            }
            labels = frame
                .targets
                .iter()
                .map(|t| classes.binary_search(t).expect("class present"))
                .collect();
        }
        let model = match self.kind {
            RelationshipKind::LinearRegression => {
                if n < 2 {
                    return Err(ModelError::TooFewRows { needed: 2, found: n });
                }
                FittedModel::Linear(linear::LinearFit::fit(&frame.features, &frame.numeric_targets())?)
            }
            RelationshipKind::DecisionTreeClassification => FittedModel::Tree(tree::TreeFit::fit(
                &frame.features,
                &labels,
                classes.len(),
                hp.max_depth.unwrap_or(DEFAULT_MAX_DEPTH),
                hp.min_leaf.unwrap_or(DEFAULT_MIN_LEAF),
            )),
            RelationshipKind::KnnClassification => FittedModel::Knn(knn::KnnFit::fit(
                &frame.features,
                &labels,
                classes.len(),
                hp.k.unwrap_or(DEFAULT_K),
            )),
            RelationshipKind::NaiveBayesClassification => FittedModel::Bayes(bayes::BayesFit::fit(
                &frame.features,
                &labels,
                classes.len(),
                hp.alpha.unwrap_or(DEFAULT_ALPHA),
            )),
            RelationshipKind::NormalDistribution => {
                FittedModel::Normal(density::NormalFit::fit(&frame.numeric_column(0))?)
            }
            RelationshipKind::KernelDensity => {
                FittedModel::Kde(density::KdeFit::fit(&frame.numeric_column(0), hp.bandwidth))
            }
            RelationshipKind::IsolationForest => {
                if n < 2 {
                    return Err(ModelError::TooFewRows { needed: 2, found: n });
                }
                FittedModel::Forest(forest::ForestFit::fit(
                    &frame.features,
                    hp.trees.unwrap_or(DEFAULT_TREES),
                    hp.subsample.unwrap_or(DEFAULT_SUBSAMPLE),
                    hp.seed.unwrap_or(DEFAULT_SEED),
                ))
            }
        };
        let mut trained = self.clone();
        trained.fitted = Some(Arc::new(Fitted {
            inputs: frame.inputs,
            output: frame.output,
            classes,
            rows: n,
            dropped: frame.dropped,
            model,
        }));
        Ok(trained)
    }

    /// Number of rows the model was trained on.
    pub fn training_rows(&self) -> Option<usize> {
        self.fitted.as_ref().map(|f| f.rows)
    }

    /// Number of training rows dropped for nulls.
    pub fn dropped_rows(&self) -> Option<usize> {
        self.fitted.as_ref().map(|f| f.dropped)
    }

    /// Class labels seen in training, sorted.
    pub fn classes(&self) -> &[Value] {
        self.fitted.as_ref().map(|f| f.classes.as_slice()).unwrap_or(&[])
    }

    fn row_features(&self, fitted: &Fitted, row: &Record) -> Result<Vec<Feature>, ModelError> {
        fitted
            .inputs
            .iter()
            .map(|c| to_feature(c, row.get(&c.name).unwrap_or(&Value::Null)))
            .collect()
    }

    /// Predicts the output attribute for one row.
    pub fn predict(&self, row: &Record) -> Result<Value, ModelError> {
        let fitted = self.fitted()?;
        if self.kind.is_scorer() {
            return Err(ModelError::Unsupported {
                operation: "predict",
                kind: self.kind,
            });
        }
        let x = self.row_features(fitted, row)?;
        Ok(self.predict_features(fitted, &x))
    }

    fn predict_features(&self, fitted: &Fitted, x: &[Feature]) -> Value {
        let class = match &fitted.model {
            FittedModel::Linear(m) => return Value::Number(m.predict(x)),
            FittedModel::Tree(m) => m.predict(x),
            FittedModel::Knn(m) => m.predict(x),
            FittedModel::Bayes(m) => m.predict(x),
            _ => unreachable!("scorers rejected by caller"),
        };
        fitted.classes[class].clone()
    }

    /// Naive Bayes class posteriors for one row, in class order.
    pub fn predict_proba(&self, row: &Record) -> Result<Vec<(Value, f64)>, ModelError> {
        let fitted = self.fitted()?;
        let FittedModel::Bayes(m) = &fitted.model else {
            return Err(ModelError::Unsupported {
                operation: "predict_proba",
                kind: self.kind,
            });
        };
        let x = self.row_features(fitted, row)?;
        Ok(fitted.classes.iter().cloned().zip(m.posteriors(&x)).collect())
    }

    /// Density (KDE, normal) or anomaly score (isolation forest) of a row.
    pub fn score(&self, row: &Record) -> Result<f64, ModelError> {
        let fitted = self.fitted()?;
        let x = self.row_features(fitted, row)?;
        self.score_features(fitted, &x)
    }

    /// Scores a single value of a univariate model.
    pub fn score_value(&self, x: f64) -> Result<f64, ModelError> {
        let fitted = self.fitted()?;
        if fitted.inputs.len() != 1 {
            return Err(ModelError::Unsupported {
                operation: "score_value on a multivariate model",
                kind: self.kind,
            });
        }
        self.score_features(fitted, &[Feature::Num(x)])
    }

    fn score_features(&self, fitted: &Fitted, x: &[Feature]) -> Result<f64, ModelError> {
        Ok(match &fitted.model {
            FittedModel::Normal(m) => m.density(x[0].num()),
            FittedModel::Kde(m) => m.density(x[0].num()),
            FittedModel::Forest(m) => m.score(x),
            _ => {
                return Err(ModelError::Unsupported {
                    operation: "score",
                    kind: self.kind,
                })
            }
        })
    }

    /// Fitted parameters worth reporting, e.g. regression coefficients.
    pub fn parameters(&self) -> Result<Vec<(String, f64)>, ModelError> {
        let fitted = self.fitted()?;
        Ok(match &fitted.model {
            FittedModel::Linear(m) => {
                let mut out = vec![("intercept".to_string(), m.intercept())];
                for (c, b) in fitted.inputs.iter().zip(m.coefficients()) {
                    out.push((c.name.clone(), *b));
                }
                out
            }
            FittedModel::Normal(m) => vec![("mean".into(), m.mean), ("std".into(), m.std)],
            FittedModel::Kde(m) => vec![("bandwidth".into(), m.bandwidth)],
            FittedModel::Tree(m) => vec![("depth".into(), m.depth() as f64), ("leaves".into(), m.leaves() as f64)],
            FittedModel::Knn(m) => vec![("k".into(), m.k() as f64)],
            FittedModel::Bayes(_) => Vec::new(),
            FittedModel::Forest(m) => vec![
                ("trees".into(), m.trees() as f64),
                ("subsample".into(), m.subsample() as f64),
            ],
        })
    }

    /// Root split of a trained decision tree, if it split at all.
    pub fn root_split(&self) -> Result<Option<SplitInfo>, ModelError> {
        let fitted = self.fitted()?;
        match &fitted.model {
            FittedModel::Tree(m) => Ok(m.root_split(&fitted.inputs)),
            _ => Err(ModelError::Unsupported {
                operation: "root_split",
                kind: self.kind,
            }),
        }
    }

    /// Evaluates the trained model on the rows of `table`.
    pub fn evaluate_table(&self, table: &Table) -> Result<EvaluationReport, ModelError> {
        let fitted = self.fitted()?;
        let (inputs, output) = self.resolve_table(table)?;
        self.check_eval_columns(fitted, &inputs, output.as_ref())?;
        let frame = self.table_frame(table, fitted.inputs.clone(), fitted.output.clone())?;
        self.evaluate_frame(fitted, frame)
    }

    /// Evaluates the trained model on name-keyed records.
    pub fn evaluate(&self, rows: &[Record]) -> Result<EvaluationReport, ModelError> {
        let fitted = self.fitted()?;
        let frame = self.record_frame(rows, fitted.inputs.clone(), fitted.output.clone())?;
        self.evaluate_frame(fitted, frame)
    }

    fn check_eval_columns(
        &self,
        fitted: &Fitted,
        inputs: &[ModelColumn],
        output: Option<&ModelColumn>,
    ) -> Result<(), ModelError> {
        for (seen, trained) in inputs
            .iter()
            .chain(output)
            .zip(fitted.inputs.iter().chain(fitted.output.as_ref()))
        {
            if seen.attribute_type != trained.attribute_type
                && !(is_numeric(seen.attribute_type) && is_numeric(trained.attribute_type))
            {
                return Err(ModelError::TypeMismatch {
                    attribute: seen.name.clone(),
                    expected: trained.attribute_type.to_string(),
                    found: seen.attribute_type.to_string(),
                });
            }
        }
        Ok(())
    }

    fn evaluate_frame(&self, fitted: &Fitted, frame: Frame) -> Result<EvaluationReport, ModelError> {
        let total = frame.features.len();
        let metrics = match &fitted.model {
            FittedModel::Linear(m) => {
                let predicted: Vec<f64> = frame.features.iter().map(|x| m.predict(x)).collect();
                report::regression(&predicted, &frame.numeric_targets())
            }
            FittedModel::Tree(_) | FittedModel::Knn(_) | FittedModel::Bayes(_) => {
                let predicted: Vec<Value> = frame
                    .features
                    .iter()
                    .map(|x| self.predict_features(fitted, x))
                    .collect();
                report::classification(&fitted.classes, &frame.targets, &predicted)
            }
            FittedModel::Normal(_) | FittedModel::Kde(_) => {
                let densities = frame
                    .features
                    .iter()
                    .map(|x| self.score_features(fitted, x))
                    .collect::<Result<Vec<_>, _>>()?;
                report::density(&densities, self.parameters()?)
            }
            FittedModel::Forest(m) => {
                let scores: Vec<f64> = frame.features.iter().map(|x| m.score(x)).collect();
                report::outlier(&scores)
            }
        };
        Ok(EvaluationReport {
            model: self.name.clone(),
            kind: self.kind,
            rows: total,
            dropped: frame.dropped,
            metrics,
        })
    }
}

#[cfg(test)]
mod tests;
