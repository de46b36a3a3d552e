//! k-nearest-neighbour classification.
//!
//! Distance is the Euclidean distance over z-scored numeric inputs plus the
//! number of mismatched categorical inputs. Neighbours are ordered by
//! distance, then training position; a tied vote goes to the class whose
//! member appears first in that order.

use super::Feature;

#[derive(Debug, Clone)]
pub(crate) struct KnnFit {
    k: usize,
    classes: usize,
    /// Per-input (mean, std) for numeric inputs.
    scale: Vec<Option<(f64, f64)>>,
    points: Vec<Vec<Feature>>,
    labels: Vec<usize>,
}

impl KnnFit {
    pub(crate) fn fit(features: &[Vec<Feature>], labels: &[usize], classes: usize, k: usize) -> Self {
        let n = features.len() as f64;
        let scale = (0..features[0].len())
            .map(|j| match features[0][j] {
                Feature::Cat(_) => None,
                Feature::Num(_) => {
                    let mean = features.iter().map(|r| r[j].num()).sum::<f64>() / n;
                    let var = features.iter().map(|r| (r[j].num() - mean).powi(2)).sum::<f64>() / n;
                    let std = var.sqrt();
                    Some((mean, if std > 0.0 { std } else { 1.0 }))
                }
            })
            .collect::<Vec<_>>();
        let points = features.iter().map(|r| standardize(&scale, r)).collect();
        Self {
            k: k.min(features.len()),
            classes,
            scale,
            points,
            labels: labels.to_vec(),
        }
    }

    pub(crate) fn k(&self) -> usize {
        self.k
    }

    pub(crate) fn predict(&self, x: &[Feature]) -> usize {
        let x = standardize(&self.scale, x);
        let mut order: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (distance(&x, p), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let neighbours = &order[..self.k];
        let mut votes = vec![0usize; self.classes];
        for &(_, i) in neighbours {
            votes[self.labels[i]] += 1;
        }
        let top = *votes.iter().max().expect("at least one class");
        neighbours
            .iter()
            .map(|&(_, i)| self.labels[i])
            .find(|&c| votes[c] == top)
            .expect("a neighbour carries the winning class")
    }
}

fn standardize(scale: &[Option<(f64, f64)>], row: &[Feature]) -> Vec<Feature> {
    row.iter()
        .zip(scale)
        .map(|(f, s)| match (f, s) {
            (Feature::Num(x), Some((mean, std))) => Feature::Num((x - mean) / std),
            _ => f.clone(),
        })
        .collect()
}

pub(crate) fn distance(a: &[Feature], b: &[Feature]) -> f64 {
    let mut squared = 0.0;
    let mut mismatches = 0.0;
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (Feature::Num(x), Feature::Num(y)) => squared += (x - y).powi(2),
            (Feature::Cat(x), Feature::Cat(y)) if x != y => mismatches += 1.0,
            _ => {}
        }
    }
    squared.sqrt() + mismatches
}
