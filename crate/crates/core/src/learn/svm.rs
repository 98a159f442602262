//! Soft-margin linear SVM trained in the dual.
//!
//! The solver works on pairs of dual variables (the smallest block that can
//! move while keeping `Σ y_i α_i = 0`), choosing the maximal violating pair
//! with second-order gain at every step. Selection is a deterministic scan in
//! index order, so identical inputs give bit-identical models.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default box constraint.
pub const DEFAULT_C: f64 = 1.0;
/// Default stopping tolerance on the KKT violation `m(α) − M(α)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: DEFAULT_C, tolerance: DEFAULT_TOLERANCE, max_iter: 10_000_000 }
    }
}

impl SvmParams {
    pub fn with_c(c: f64) -> Self {
        Self { c, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub regularization_c: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// `true` (positive class) when the decision value is non-negative.
    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) >= 0.0
    }

    /// Multiplies weights and bias by `k`.
    pub fn scaled(&self, k: f64) -> LinearModel {
        LinearModel {
            weights: self.weights.iter().map(|w| w * k).collect(),
            bias: self.bias * k,
            ..self.clone()
        }
    }
}

pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `min ½αᵀQα − Σα` subject to `0 ≤ α ≤ C`, `yᵀα = 0`, where
/// `Q_ij = y_i y_j K(i, j)`.
pub(crate) fn solve_dual<K: Fn(usize, usize) -> f64>(kernel: K, y: &[f64], params: &SvmParams) -> DualSolution {
    let l = y.len();
    let c = params.c;
    let q = |i: usize, j: usize| y[i] * y[j] * kernel(i, j);
    let qd: Vec<f64> = (0..l).map(|i| kernel(i, i)).collect();
    let mut alpha = vec![0.0; l];
    let mut grad = vec![-1.0; l];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        // maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            let v = -y[t] * grad[t];
            let eligible = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if eligible && v >= gmax {
                gmax = v;
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };
        // partner in I_low with the largest second-order decrease
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        for t in 0..l {
            let eligible = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
            if !eligible {
                continue;
            }
            let v = y[t] * grad[t];
            gmax2 = gmax2.max(v);
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let quad = qd[i] + qd[t] - 2.0 * kernel(i, t);
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= best {
                    best = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < params.tolerance {
            converged = true;
            break;
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = q(i, j);
        if y[i] != y[j] {
            let quad = (qd[i] + qd[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (k, g) in grad.iter_mut().enumerate() {
            *g += q(i, k) * di + q(j, k) * dj;
        }
    }

    // intercept from free vectors, else the middle of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..l {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };
    DualSolution { alpha, bias: -rho, iterations, converged }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_training_set(rows: &[Vec<f64>], labels: &[bool]) -> Result<usize> {
    if rows.len() != labels.len() {
        return Err(Error::Dimension(format!("{} rows vs {} labels", rows.len(), labels.len())));
    }
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Dimension("ragged training rows".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training rows"));
    }
    if !(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l)) {
        return Err(Error::SingleClass);
    }
    Ok(d)
}

/// Primal weights `Σ α_i y_i x_i` for the rows selected by `idx`.
pub(crate) fn primal_weights(rows: &[Vec<f64>], idx: &[usize], y: &[f64], alpha: &[f64], d: usize) -> Vec<f64> {
    let mut w = vec![0.0; d];
    for (k, &r) in idx.iter().enumerate() {
        if alpha[k] != 0.0 {
            for (wj, xj) in w.iter_mut().zip(&rows[r]) {
                *wj += alpha[k] * y[k] * xj;
            }
        }
    }
    w
}

/// Gram matrix of inner products between rows.
pub(crate) fn gram(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = dot(&rows[i], &rows[j]);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}

/// Trains on the subset `idx` of a precomputed Gram matrix.
pub(crate) fn train_subset(
    rows: &[Vec<f64>],
    labels: &[bool],
    gram: &[Vec<f64>],
    idx: &[usize],
    params: &SvmParams,
) -> LinearModel {
    let y: Vec<f64> = idx.iter().map(|&i| if labels[i] { 1.0 } else { -1.0 }).collect();
    let sol = solve_dual(|a, b| gram[idx[a]][idx[b]], &y, params);
    let d = rows.first().map_or(0, Vec::len);
    LinearModel {
        weights: primal_weights(rows, idx, &y, &sol.alpha, d),
        bias: sol.bias,
        regularization_c: params.c,
        iterations: sol.iterations,
        converged: sol.converged,
    }
}

/// Trains a linear SVM; `labels[i]` is `true` for the positive class.
pub fn train_svm(rows: &[Vec<f64>], labels: &[bool], c: f64) -> Result<LinearModel> {
    train_svm_with(rows, labels, &SvmParams::with_c(c))
}

pub fn train_svm_with(rows: &[Vec<f64>], labels: &[bool], params: &SvmParams) -> Result<LinearModel> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {}", params.c)));
    }
    check_training_set(rows, labels)?;
    let g = gram(rows);
    let idx: Vec<usize> = (0..rows.len()).collect();
    let model = train_subset(rows, labels, &g, &idx, params);
    if !model.converged {
        log::warn!("SVM stopped after {} iterations without reaching tolerance", model.iterations);
    }
    Ok(model)
}
