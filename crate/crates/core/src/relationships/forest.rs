//! Isolation forest anomaly scores.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Feature;

const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Average path length of an unsuccessful binary search tree lookup over
/// `n` points.
pub(crate) fn average_path_length(n: usize) -> f64 {
    match n {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let m = (n - 1) as f64;
            2.0 * (m.ln() + EULER_GAMMA) - 2.0 * m / n as f64
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    External(usize),
    Internal {
        feature: usize,
        split: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct ForestFit {
    trees: Vec<Node>,
    subsample: usize,
}

fn build(points: &[Vec<f64>], idx: &[usize], depth: usize, limit: usize, rng: &mut ChaCha8Rng) -> Node {
    if depth >= limit || idx.len() <= 1 {
        return Node::External(idx.len());
    }
    let ranges: Vec<(usize, f64, f64)> = (0..points[0].len())
        .filter_map(|j| {
            let lo = idx.iter().map(|&i| points[i][j]).fold(f64::INFINITY, f64::min);
            let hi = idx.iter().map(|&i| points[i][j]).fold(f64::NEG_INFINITY, f64::max);
            (hi > lo).then_some((j, lo, hi))
        })
        .collect();
    if ranges.is_empty() {
        return Node::External(idx.len());
    }
    let (feature, lo, hi) = ranges[rng.random_range(0..ranges.len())];
    let split = rng.random_range(lo..hi);
    let (left, right): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| points[i][feature] < split);
    Node::Internal {
        feature,
        split,
        left: Box::new(build(points, &left, depth + 1, limit, rng)),
        right: Box::new(build(points, &right, depth + 1, limit, rng)),
    }
}

fn path_length(node: &Node, x: &[f64], depth: usize) -> f64 {
    match node {
        Node::External(size) => depth as f64 + average_path_length(*size),
        Node::Internal {
            feature,
            split,
            left,
            right,
        } => path_length(if x[*feature] < *split { left } else { right }, x, depth + 1),
    }
}

impl ForestFit {
    pub(crate) fn fit(features: &[Vec<Feature>], trees: usize, subsample: usize, seed: u64) -> Self {
        let points: Vec<Vec<f64>> = features.iter().map(|r| r.iter().map(Feature::num).collect()).collect();
        let psi = subsample.min(points.len());
        let limit = (psi as f64).log2().ceil() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees = (0..trees)
            .map(|_| {
                let idx = sample(&mut rng, points.len(), psi).into_vec();
                build(&points, &idx, 0, limit, &mut rng)
            })
            .collect();
        Self { trees, subsample: psi }
    }

    pub(crate) fn trees(&self) -> usize {
        self.trees.len()
    }

    pub(crate) fn subsample(&self) -> usize {
        self.subsample
    }

    /// `2^(-E[h(x)] / c(psi))`.
    pub(crate) fn score(&self, x: &[Feature]) -> f64 {
        let x: Vec<f64> = x.iter().map(Feature::num).collect();
        let mean = self.trees.iter().map(|t| path_length(t, &x, 0)).sum::<f64>() / self.trees.len() as f64;
        2f64.powf(-mean / average_path_length(self.subsample))
    }
}
