//! Ordinary least squares with an intercept.

use nalgebra::{DMatrix, DVector};

use super::{Feature, ModelError};

#[derive(Debug, Clone)]
pub(crate) struct LinearFit {
    /// Intercept followed by one coefficient per input.
    beta: Vec<f64>,
}

impl LinearFit {
    pub(crate) fn fit(features: &[Vec<Feature>], y: &[f64]) -> Result<Self, ModelError> {
        let n = features.len();
        let p = features[0].len() + 1;
        let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { features[i][j - 1].num() });
        let y = DVector::from_column_slice(y);
        let beta = x
            .svd(true, true)
            .solve(&y, 1e-12)
            .map_err(|e| ModelError::Degenerate(format!("least squares failed: {e}")))?;
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(ModelError::Degenerate("non-finite regression coefficients".into()));
        }
        Ok(Self {
            beta: beta.iter().copied().collect(),
        })
    }

    pub(crate) fn intercept(&self) -> f64 {
        self.beta[0]
    }

    pub(crate) fn coefficients(&self) -> &[f64] {
        &self.beta[1..]
    }

    pub(crate) fn predict(&self, x: &[Feature]) -> f64 {
        self.beta[0] + self.beta[1..].iter().zip(x).map(|(b, f)| b * f.num()).sum::<f64>()
    }
}
