use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// Largest combined sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Exact when the samples are small and tie-free, else normal.
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Mann–Whitney U of the first group: its rank sum minus n1(n1+1)/2.
    pub statistic_u: f64,
    pub p_value: f64,
    pub group_sizes: (usize, usize),
    pub exact: bool,
}

/// Two-sided Wilcoxon rank-sum (Mann–Whitney U) test.
pub fn wilcoxon_ranksum(group_a: &[f64], group_b: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_ranksum_with(group_a, group_b, Method::Auto)
}

pub fn wilcoxon_ranksum_with(group_a: &[f64], group_b: &[f64], method: Method) -> Result<WilcoxonResult> {
    let (n1, n2) = (group_a.len(), group_b.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::EmptyInput("rank-sum test needs two non-empty groups"));
    }
    if group_a.iter().chain(group_b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rank-sum input"));
    }
    let combined: Vec<f64> = group_a.iter().chain(group_b).copied().collect();
    let (ranks, tie_sizes) = midranks(&combined);
    let rank_sum: f64 = ranks[..n1].iter().sum();
    let u = rank_sum - (n1 * (n1 + 1)) as f64 / 2.0;
    let has_ties = !tie_sizes.is_empty();

    let exact = match method {
        Method::Auto => n1 + n2 <= EXACT_MAX_N && !has_ties,
        Method::Exact if has_ties => {
            return Err(Error::InvalidArgument("exact rank-sum p-value requires tie-free samples".into()))
        }
        Method::Exact => true,
        Method::Normal => false,
    };
    let p = if exact { exact_p(u, n1, n2) } else { normal_p(u, n1, n2, &tie_sizes) };
    Ok(WilcoxonResult {
        statistic_u: u,
        p_value: p.clamp(f64::MIN_POSITIVE, 1.0),
        group_sizes: (n1, n2),
        exact,
    })
}

/// Average ranks (1-based) and the sizes of tie groups larger than one.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Number of arrangements giving each value of U, for group sizes (m, n).
fn u_counts(m: usize, n: usize) -> Vec<f64> {
    // counts[j][u] for the current m-row, built up with the recurrence
    // f(m, n, u) = f(m - 1, n, u - n) + f(m, n - 1, u)
    let max_u = m * n;
    let mut prev: Vec<Vec<f64>> = (0..=n).map(|_| vec![1.0]).collect();
    for mi in 1..=m {
        let mut cur: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        cur.push(vec![1.0]);
        for ni in 1..=n {
            let mut row = vec![0.0; mi * ni + 1];
            for (u, c) in prev[ni].iter().enumerate() {
                row[u + ni] += c;
            }
            for (u, c) in cur[ni - 1].iter().enumerate() {
                row[u] += c;
            }
            cur.push(row);
        }
        prev = cur;
    }
    let out = prev.swap_remove(n);
    debug_assert_eq!(out.len(), max_u + 1);
    out
}

fn exact_p(u: f64, n1: usize, n2: usize) -> f64 {
    let counts = u_counts(n1, n2);
    let total: f64 = counts.iter().sum();
    let u = u.round() as usize;
    let lower: f64 = counts[..=u].iter().sum::<f64>() / total;
    let upper: f64 = counts[u..].iter().sum::<f64>() / total;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p(u: f64, n1: usize, n2: usize, ties: &[usize]) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    let n = a + b;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let d = u - a * b / 2.0;
    // f64::signum(0.0) is 1, so a centred statistic needs its own branch
    let correction = if d == 0.0 { 0.0 } else { 0.5 * d.signum() };
    let z = (d - correction) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * normal.cdf(z).min(normal.sf(z))).min(1.0)
}
