//! Evaluation metrics for trained models.

use std::collections::BTreeSet;

use serde_json::{json, Value as Json};

use super::RelationshipKind;
use crate::tabular::Value;

/// Kind-specific evaluation metrics.
#[derive(Debug, Clone, PartialEq)]
pub enum Metrics {
    Classification {
        accuracy: f64,
        /// Sorted union of training classes and observed labels.
        labels: Vec<Value>,
        /// `confusion[actual][predicted]`, indexed like `labels`.
        confusion: Vec<Vec<usize>>,
    },
    Regression {
        rmse: f64,
        r_squared: f64,
    },
    Density {
        mean_log_likelihood: f64,
        parameters: Vec<(String, f64)>,
    },
    Outlier {
        min: f64,
        mean: f64,
        max: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub model: String,
    pub kind: RelationshipKind,
    /// Rows evaluated.
    pub rows: usize,
    /// Rows skipped for nulls in a used attribute.
    pub dropped: usize,
    pub metrics: Metrics,
}

impl EvaluationReport {
    pub fn accuracy(&self) -> Option<f64> {
        match self.metrics {
            Metrics::Classification { accuracy, .. } => Some(accuracy),
            _ => None,
        }
    }

    pub fn rmse(&self) -> Option<f64> {
        match self.metrics {
            Metrics::Regression { rmse, .. } => Some(rmse),
            _ => None,
        }
    }

    pub fn r_squared(&self) -> Option<f64> {
        match self.metrics {
            Metrics::Regression { r_squared, .. } => Some(r_squared),
            _ => None,
        }
    }

    /// Number of scalar values the report carries: accuracy plus the
    /// confusion cells, two regression metrics, the log-likelihood plus the
    /// fitted parameters, or three score summaries.
    pub fn scalar_count(&self) -> usize {
        match &self.metrics {
            Metrics::Classification { labels, .. } => 1 + labels.len() * labels.len(),
            Metrics::Regression { .. } => 2,
            Metrics::Density { parameters, .. } => 1 + parameters.len(),
            Metrics::Outlier { .. } => 3,
        }
    }

    pub fn to_json(&self) -> Json {
        let metrics = match &self.metrics {
            Metrics::Classification {
                accuracy,
                labels,
                confusion,
            } => json!({
                "accuracy": accuracy,
                "labels": labels.iter().map(Value::to_json).collect::<Vec<_>>(),
                "confusion": confusion,
            }),
            Metrics::Regression { rmse, r_squared } => json!({ "rmse": rmse, "rSquared": r_squared }),
            Metrics::Density {
                mean_log_likelihood,
                parameters,
            } => {
                let params: serde_json::Map<String, Json> =
                    parameters.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
                json!({ "meanLogLikelihood": mean_log_likelihood, "parameters": params })
            }
            Metrics::Outlier { min, mean, max } => json!({ "min": min, "mean": mean, "max": max }),
        };
        json!({
            "model": self.model,
            "kind": self.kind.as_str(),
            "rows": self.rows,
            "dropped": self.dropped,
            "metrics": metrics,
        })
    }
}

pub(super) fn classification(classes: &[Value], actual: &[Value], predicted: &[Value]) -> Metrics {
    let labels: Vec<Value> = classes
        .iter()
        .chain(actual)
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index = |v: &Value| labels.binary_search(v).expect("label present");
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    for (a, p) in actual.iter().zip(predicted) {
        confusion[index(a)][index(p)] += 1;
    }
    let correct: usize = (0..labels.len()).map(|i| confusion[i][i]).sum();
    Metrics::Classification {
        accuracy: correct as f64 / actual.len() as f64,
        labels,
        confusion,
    }
}

pub(super) fn regression(predicted: &[f64], actual: &[f64]) -> Metrics {
    let n = actual.len() as f64;
    let sse: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a).powi(2)).sum();
    let mean = actual.iter().sum::<f64>() / n;
    let sst: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    let r_squared = if sst > 0.0 {
        1.0 - sse / sst
    } else if sse <= f64::EPSILON {
        1.0
    } else {
        0.0
    };
    Metrics::Regression {
        rmse: (sse / n).sqrt(),
        r_squared,
    }
}

pub(super) fn density(densities: &[f64], parameters: Vec<(String, f64)>) -> Metrics {
    let total: f64 = densities.iter().map(|d| d.max(f64::MIN_POSITIVE).ln()).sum();
    Metrics::Density {
        mean_log_likelihood: total / densities.len() as f64,
        parameters,
    }
}

pub(super) fn outlier(scores: &[f64]) -> Metrics {
    Metrics::Outlier {
        min: scores.iter().copied().fold(f64::INFINITY, f64::min),
        mean: scores.iter().sum::<f64>() / scores.len() as f64,
        max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}
