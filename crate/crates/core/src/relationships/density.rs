//! Univariate density models.

use std::f64::consts::PI;

use super::ModelError;

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

fn mean_and_sample_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Normal distribution with the sample mean and sample (n - 1) std.
#[derive(Debug, Clone)]
pub(crate) struct NormalFit {
    pub(crate) mean: f64,
    pub(crate) std: f64,
}

impl NormalFit {
    pub(crate) fn fit(xs: &[f64]) -> Result<Self, ModelError> {
        if xs.len() < 2 {
            return Err(ModelError::TooFewRows {
                needed: 2,
                found: xs.len(),
            });
        }
        let (mean, std) = mean_and_sample_std(xs);
        if std <= 0.0 {
            return Err(ModelError::Degenerate(
                "normal fit needs a non-zero standard deviation".into(),
            ));
        }
        Ok(Self { mean, std })
    }

    pub(crate) fn density(&self, x: f64) -> f64 {
        std_normal_pdf((x - self.mean) / self.std) / self.std
    }
}

/// Gaussian kernel density estimate.
#[derive(Debug, Clone)]
pub(crate) struct KdeFit {
    pub(crate) bandwidth: f64,
    points: Vec<f64>,
}

impl KdeFit {
    /// Uses `bandwidth` when given, else Silverman's rule
    /// `1.06 * std * n^(-1/5)`. A zero spread falls back to 1.
    pub(crate) fn fit(xs: &[f64], bandwidth: Option<f64>) -> Self {
        let bandwidth = bandwidth.unwrap_or_else(|| {
            let (_, std) = mean_and_sample_std(xs);
            let h = 1.06 * std * (xs.len() as f64).powf(-0.2);
            if h > 0.0 {
                h
            } else {
                1.0
            }
        });
        Self {
            bandwidth,
            points: xs.to_vec(),
        }
    }

    pub(crate) fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        self.points.iter().map(|p| std_normal_pdf((x - p) / h)).sum::<f64>() / (self.points.len() as f64 * h)
    }
}
