//! Naive Bayes with categorical (Laplace-smoothed) and Gaussian likelihoods.

use std::collections::{BTreeMap, BTreeSet};

use super::Feature;
use crate::tabular::Value;

#[derive(Debug, Clone)]
enum Likelihood {
    /// Per-class value counts plus the training vocabulary size.
    Categorical {
        counts: Vec<BTreeMap<Value, usize>>,
        vocabulary: usize,
    },
    /// Per-class mean and variance.
    Gaussian { params: Vec<(f64, f64)> },
}

#[derive(Debug, Clone)]
pub(crate) struct BayesFit {
    alpha: f64,
    class_sizes: Vec<usize>,
    log_priors: Vec<f64>,
    likelihoods: Vec<Likelihood>,
}

impl BayesFit {
    pub(crate) fn fit(features: &[Vec<Feature>], labels: &[usize], classes: usize, alpha: f64) -> Self {
        let n = features.len();
        let mut class_sizes = vec![0usize; classes];
        for &l in labels {
            class_sizes[l] += 1;
        }
        let log_priors = class_sizes.iter().map(|&c| (c as f64 / n as f64).ln()).collect();

        let variance = |xs: &[f64]| {
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            (
                mean,
                xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64,
            )
        };
        // Variance floor proportional to the widest numeric input.
        let max_var = (0..features[0].len())
            .filter(|&j| matches!(features[0][j], Feature::Num(_)))
            .map(|j| variance(&features.iter().map(|r| r[j].num()).collect::<Vec<_>>()).1)
            .fold(0.0, f64::max);
        let epsilon = 1e-9 * if max_var > 0.0 { max_var } else { 1.0 };

        let likelihoods = (0..features[0].len())
            .map(|j| match features[0][j] {
                Feature::Cat(_) => {
                    let mut counts = vec![BTreeMap::new(); classes];
                    let mut vocabulary = BTreeSet::new();
                    for (row, &l) in features.iter().zip(labels) {
                        if let Feature::Cat(v) = &row[j] {
                            *counts[l].entry(v.clone()).or_insert(0) += 1;
                            vocabulary.insert(v.clone());
                        }
                    }
                    Likelihood::Categorical {
                        counts,
                        vocabulary: vocabulary.len(),
                    }
                }
                Feature::Num(_) => {
                    let params = (0..classes)
                        .map(|c| {
                            let xs: Vec<f64> = features
                                .iter()
                                .zip(labels)
                                .filter(|(_, &l)| l == c)
                                .map(|(r, _)| r[j].num())
                                .collect();
                            let (mean, var) = variance(&xs);
                            (mean, var + epsilon)
                        })
                        .collect();
                    Likelihood::Gaussian { params }
                }
            })
            .collect();
        Self {
            alpha,
            class_sizes,
            log_priors,
            likelihoods,
        }
    }

    fn log_joint(&self, x: &[Feature]) -> Vec<f64> {
        (0..self.class_sizes.len())
            .map(|c| {
                let mut lp = self.log_priors[c];
                for (lik, f) in self.likelihoods.iter().zip(x) {
                    lp += match (lik, f) {
                        (Likelihood::Categorical { counts, vocabulary }, Feature::Cat(v)) => {
                            let count = counts[c].get(v).copied().unwrap_or(0) as f64;
                            ((count + self.alpha) / (self.class_sizes[c] as f64 + self.alpha * *vocabulary as f64)).ln()
                        }
                        (Likelihood::Gaussian { params }, Feature::Num(v)) => {
                            let (mean, var) = params[c];
                            -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (v - mean).powi(2) / (2.0 * var)
                        }
                        _ => unreachable!("feature kinds fixed at training"),
                    };
                }
                lp
            })
            .collect()
    }

    /// Normalized class posteriors.
    pub(crate) fn posteriors(&self, x: &[Feature]) -> Vec<f64> {
        let lj = self.log_joint(x);
        let max = lj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_norm = max + lj.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        lj.iter().map(|l| (l - log_norm).exp()).collect()
    }

    pub(crate) fn predict(&self, x: &[Feature]) -> usize {
        let lj = self.log_joint(x);
        let mut best = 0;
        for (i, &l) in lj.iter().enumerate() {
            if l > lj[best] {
                best = i;
            }
        }
        best
    }
}
