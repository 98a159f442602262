use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tier {
    High,
    Medium,
    Low,
}

/// Exact 1-D k-means with three clusters.
///
/// Equal values always share a cluster. The optimum over contiguous groups of
/// the sorted distinct values (weighted by multiplicity) is found by dynamic
/// programming; clusters are then labelled by descending mean. With fewer than
/// three distinct values each distinct value gets its own label, starting at
/// [`Tier::High`] for the largest.
pub fn kmeans3_1d(values: &[f64]) -> Result<Vec<Tier>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("k-means input is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means input"));
    }
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let weights: Vec<f64> = distinct
        .iter()
        .map(|d| values.iter().filter(|&&v| v == *d).count() as f64)
        .collect();

    // upper bound (exclusive, in `distinct`) of the low and medium clusters
    let (low_end, mid_end) = match distinct.len() {
        1 => (0, 0),
        2 => (0, 1),
        _ => optimal_splits(&distinct, &weights),
    };
    let tier_of = |v: f64| {
        let pos = distinct.partition_point(|d| *d < v);
        if pos < low_end {
            Tier::Low
        } else if pos < mid_end {
            Tier::Medium
        } else {
            Tier::High
        }
    };
    Ok(values.iter().map(|&v| tier_of(v)).collect())
}

/// Weighted SSE of `xs[i..j]` from prefix sums.
struct Prefix {
    w: Vec<f64>,
    s: Vec<f64>,
    ss: Vec<f64>,
}

impl Prefix {
    fn new(xs: &[f64], ws: &[f64]) -> Self {
        let mut p = Prefix { w: vec![0.0], s: vec![0.0], ss: vec![0.0] };
        for (x, w) in xs.iter().zip(ws) {
            p.w.push(p.w.last().unwrap() + w);
            p.s.push(p.s.last().unwrap() + w * x);
            p.ss.push(p.ss.last().unwrap() + w * x * x);
        }
        p
    }

    fn cost(&self, i: usize, j: usize) -> f64 {
        let w = self.w[j] - self.w[i];
        if w == 0.0 {
            return 0.0;
        }
        let s = self.s[j] - self.s[i];
        (self.ss[j] - self.ss[i] - s * s / w).max(0.0)
    }
}

/// DP over split points: `best[k][j]` is the minimal cost of putting the
/// first `j` distinct values into `k + 1` non-empty clusters.
fn optimal_splits(xs: &[f64], ws: &[f64]) -> (usize, usize) {
    const K: usize = 3;
    let n = xs.len();
    let pre = Prefix::new(xs, ws);
    let mut best = vec![vec![f64::INFINITY; n + 1]; K];
    let mut arg = vec![vec![0usize; n + 1]; K];
    for j in 1..=n {
        best[0][j] = pre.cost(0, j);
    }
    for k in 1..K {
        for j in (k + 1)..=n {
            for i in k..j {
                let c = best[k - 1][i] + pre.cost(i, j);
                if c < best[k][j] {
                    best[k][j] = c;
                    arg[k][j] = i;
                }
            }
        }
    }
    let mid_end = arg[2][n];
    let low_end = arg[1][mid_end];
    (low_end, mid_end)
}
