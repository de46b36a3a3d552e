//! Closed-form and exhaustive references for the relationship models.

use std::collections::BTreeMap;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Least-squares `[intercept, coefficients...]` from the normal equations
/// `XᵀX β = Xᵀy`, with a leading column of ones in `X`.
pub fn normal_equations(xs: &[Vec<f64>], ys: &[f64]) -> Vec<f64> {
    let design: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| std::iter::once(1.0).chain(x.iter().copied()).collect())
        .collect();
    let p = design[0].len();
    let xtx = (0..p)
        .map(|i| (0..p).map(|j| design.iter().map(|r| r[i] * r[j]).sum()).collect())
        .collect();
    let xty = (0..p)
        .map(|i| design.iter().zip(ys).map(|(r, y)| r[i] * y).sum())
        .collect();
    gauss_solve(xtx, xty)
}

/// Simple-regression slope of `ys` on `xs`: cov(x, y) / var(x).
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn gini(labels: &[&str], idx: &[usize]) -> f64 {
    let mut counts = BTreeMap::new();
    for &i in idx {
        *counts.entry(labels[i]).or_insert(0usize) += 1;
    }
    let n = idx.len() as f64;
    1.0 - counts.values().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// One candidate root split and its weighted Gini impurity.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub attribute: String,
    /// `Ok(threshold)` for `x <= threshold`, `Err(category)` for `x == category`.
    pub rule: Result<f64, String>,
    pub impurity: f64,
}

/// A numeric or categorical input column.
pub enum Column<'a> {
    Num(&'a str, &'a [f64]),
    Cat(&'a str, &'a [&'a str]),
}

/// Every candidate split in scan order: inputs in declaration order;
/// numeric thresholds at midpoints of consecutive distinct values,
/// ascending; categories one-vs-rest in sorted order (only when the column
/// has two or more categories). Splits leaving a side empty are skipped.
pub fn exhaustive_splits(columns: &[Column<'_>], labels: &[&str]) -> Vec<Candidate> {
    let n = labels.len();
    let weighted = |left: Vec<usize>| {
        let right: Vec<usize> = (0..n).filter(|i| !left.contains(i)).collect();
        if left.is_empty() || right.is_empty() {
            return None;
        }
        Some((left.len() as f64 * gini(labels, &left) + right.len() as f64 * gini(labels, &right)) / n as f64)
    };
    let mut out = Vec::new();
    for column in columns {
        match column {
            Column::Num(name, xs) => {
                let mut distinct = xs.to_vec();
                distinct.sort_by(f64::total_cmp);
                distinct.dedup();
                for w in distinct.windows(2) {
                    let t = w[0] + (w[1] - w[0]) / 2.0;
                    if let Some(g) = weighted((0..n).filter(|&i| xs[i] <= t).collect()) {
                        out.push(Candidate {
                            attribute: name.to_string(),
                            rule: Ok(t),
                            impurity: g,
                        });
                    }
                }
            }
            Column::Cat(name, cs) => {
                let mut categories = cs.to_vec();
                categories.sort();
                categories.dedup();
                if categories.len() < 2 {
                    continue;
                }
                for c in categories {
                    if let Some(g) = weighted((0..n).filter(|&i| cs[i] == c).collect()) {
                        out.push(Candidate {
                            attribute: name.to_string(),
                            rule: Err(c.to_string()),
                            impurity: g,
                        });
                    }
                }
            }
        }
    }
    out
}

/// The first candidate within `eps` of the minimum impurity.
pub fn best_split(candidates: &[Candidate], eps: f64) -> Option<&Candidate> {
    let best = candidates.iter().map(|c| c.impurity).fold(f64::INFINITY, f64::min);
    candidates.iter().find(|c| c.impurity < best + eps)
}

/// Majority label among the `k` nearest training points, given each
/// point's distance to the probe. Neighbours are ordered by
/// `(distance, index)`; a tied vote goes to the tied label whose member is
/// nearest.
pub fn knn_vote<'a>(distances: &[f64], labels: &[&'a str], k: usize) -> &'a str {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    // selection sort keeps the reference obviously correct
    for i in 0..order.len() {
        let mut m = i;
        for j in i + 1..order.len() {
            let (a, b) = (order[j], order[m]);
            if distances[a] < distances[b] || (distances[a] == distances[b] && a < b) {
                m = j;
            }
        }
        order.swap(i, m);
    }
    let nearest = &order[..k.min(order.len())];
    let votes = |l: &str| nearest.iter().filter(|&&i| labels[i] == l).count();
    let top = nearest.iter().map(|&i| votes(labels[i])).max().expect("k >= 1");
    let winner = nearest
        .iter()
        .find(|&&i| votes(labels[i]) == top)
        .expect("some label has the top vote");
    labels[*winner]
}

/// Composite trapezoid rule over `[lo, hi]` with `steps` panels.
pub fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
    let dx = (hi - lo) / steps as f64;
    let mut total = 0.5 * (f(lo) + f(hi));
    for i in 1..steps {
        total += f(lo + i as f64 * dx);
    }
    total * dx
}
