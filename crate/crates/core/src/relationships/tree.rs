//! CART classification tree with Gini impurity.
//!
//! Numeric inputs split at midpoints between adjacent distinct values
//! (`x <= t` goes left); categorical inputs split one-vs-rest (`x == c` goes
//! left). Candidates are scanned in input order, then by ascending threshold
//! or category, and only a strictly lower impurity replaces the current best.

use std::collections::BTreeSet;

use super::{Feature, ModelColumn};
use crate::tabular::Value;

const TIE_EPSILON: f64 = 1e-12;

/// Test applied at a split; rows passing it go left.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    AtMost(f64),
    Equals(Value),
}

/// A split as chosen during training.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitInfo {
    pub attribute: String,
    pub rule: SplitRule,
    /// Size-weighted Gini impurity of the two children.
    pub impurity: f64,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        rule: SplitRule,
        impurity: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct TreeFit {
    root: Node,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

struct Builder<'a> {
    features: &'a [Vec<Feature>],
    labels: &'a [usize],
    classes: usize,
    max_depth: usize,
    min_leaf: usize,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &i in idx {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    fn build(&self, idx: &[usize], depth: usize) -> Node {
        let counts = self.counts(idx);
        let class = majority(&counts);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth {
            return Node::Leaf { class };
        }
        let Some((feature, rule, impurity)) = self.best_split(idx) else {
            return Node::Leaf { class };
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| passes(&rule, &self.features[i][feature]));
        Node::Split {
            feature,
            rule,
            impurity,
            left: Box::new(self.build(&left, depth + 1)),
            right: Box::new(self.build(&right, depth + 1)),
        }
    }

    fn best_split(&self, idx: &[usize]) -> Option<(usize, SplitRule, f64)> {
        let n = idx.len();
        let total = self.counts(idx);
        let mut best: Option<(usize, SplitRule, f64)> = None;
        let mut consider = |feature: usize, rule: SplitRule, left: &[usize], nl: usize| {
            let nr = n - nl;
            if nl < self.min_leaf || nr < self.min_leaf {
                return;
            }
            let right: Vec<usize> = total.iter().zip(left).map(|(t, l)| t - l).collect();
            let impurity = (nl as f64 * gini(left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.2 - TIE_EPSILON) {
                best = Some((feature, rule, impurity));
            }
        };
        for j in 0..self.features[idx[0]].len() {
            match &self.features[idx[0]][j] {
                Feature::Num(_) => {
                    let mut points: Vec<(f64, usize)> = idx
                        .iter()
                        .map(|&i| (self.features[i][j].num(), self.labels[i]))
                        .collect();
                    points.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut left = vec![0; self.classes];
                    for k in 0..points.len() - 1 {
                        left[points[k].1] += 1;
                        let (a, b) = (points[k].0, points[k + 1].0);
                        if a < b {
                            consider(j, SplitRule::AtMost(a + (b - a) / 2.0), &left, k + 1);
                        }
                    }
                }
                Feature::Cat(_) => {
                    let categories: BTreeSet<&Value> = idx
                        .iter()
                        .map(|&i| match &self.features[i][j] {
                            Feature::Cat(v) => v,
                            Feature::Num(_) => unreachable!("column types are uniform"),
                        })
                        .collect();
                    if categories.len() < 2 {
                        continue;
                    }
                    for c in categories {
                        let rule = SplitRule::Equals(c.clone());
                        let mut left = vec![0; self.classes];
                        let mut nl = 0;
                        for &i in idx {
                            if passes(&rule, &self.features[i][j]) {
                                left[self.labels[i]] += 1;
                                nl += 1;
                            }
                        }
                        consider(j, rule, &left, nl);
                    }
                }
            }
        }
        best
    }
}

fn passes(rule: &SplitRule, x: &Feature) -> bool {
    match (rule, x) {
        (SplitRule::AtMost(t), Feature::Num(v)) => v <= t,
        (SplitRule::Equals(c), Feature::Cat(v)) => v == c,
        _ => false,
    }
}

impl TreeFit {
    pub(crate) fn fit(
        features: &[Vec<Feature>],
        labels: &[usize],
        classes: usize,
        max_depth: usize,
        min_leaf: usize,
    ) -> Self {
        let builder = Builder {
            features,
            labels,
            classes,
            max_depth,
            min_leaf,
        };
        let idx: Vec<usize> = (0..features.len()).collect();
        Self {
            root: builder.build(&idx, 0),
        }
    }

    pub(crate) fn predict(&self, x: &[Feature]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    rule,
                    left,
                    right,
                    ..
                } => node = if passes(rule, &x[*feature]) { left } else { right },
            }
        }
    }

    pub(crate) fn depth(&self) -> usize {
        fn depth(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
            }
        }
        depth(&self.root)
    }

    pub(crate) fn leaves(&self) -> usize {
        fn leaves(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => leaves(left) + leaves(right),
            }
        }
        leaves(&self.root)
    }

    pub(crate) fn root_split(&self, inputs: &[ModelColumn]) -> Option<SplitInfo> {
        match &self.root {
            Node::Leaf { .. } => None,
            Node::Split {
                feature,
                rule,
                impurity,
                ..
            } => Some(SplitInfo {
                attribute: inputs[*feature].name.clone(),
                rule: rule.clone(),
                impurity: *impurity,
            }),
        }
    }
}
