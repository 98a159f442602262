use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// Column means of the input, subtracted before projection.
    pub means: Vec<f64>,
    /// `features × components`; column `k` is the k-th principal axis.
    pub loadings: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// `rows × components`.
    pub scores: Vec<Vec<f64>>,
}

impl PcaResult {
    pub fn loading_column(&self, k: usize) -> Vec<f64> {
        self.loadings.iter().map(|r| r[k]).collect()
    }

    /// Maps scores back to the input space using all components.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        self.scores
            .iter()
            .map(|s| {
                self.means
                    .iter()
                    .enumerate()
                    .map(|(f, m)| m + s.iter().zip(&self.loadings[f]).map(|(a, b)| a * b).sum::<f64>())
                    .collect()
            })
            .collect()
    }
}

/// Sample covariance (n − 1 denominator) of the columns of `rows`.
pub fn covariance(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    let means: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let mut cov = vec![vec![0.0; p]; p];
    for r in rows {
        for i in 0..p {
            let di = r[i] - means[i];
            for j in i..p {
                cov[i][j] += di * (r[j] - means[j]);
            }
        }
    }
    for i in 0..p {
        for j in i..p {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    (means, cov)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (unsorted) and eigenvectors as the columns of the
/// second matrix.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let sign = if theta < 0.0 { -1.0 } else { 1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Principal components of the covariance matrix of `rows`.
///
/// Components are sorted by descending variance. Each loading column is
/// signed so that its largest-magnitude entry is positive.
pub fn pca(rows: &[Vec<f64>]) -> Result<PcaResult> {
    if rows.len() < 2 {
        return Err(Error::EmptyInput("PCA needs at least two rows"));
    }
    let p = rows[0].len();
    if p < 2 {
        return Err(Error::EmptyInput("PCA needs at least two columns"));
    }
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::Dimension("ragged PCA input".into()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("PCA input"));
    }
    let (means, cov) = covariance(rows);
    let (eigvals, eigvecs) = jacobi_eigen(&cov);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eigvals[b].total_cmp(&eigvals[a]));

    let mut loadings = vec![vec![0.0; p]; p];
    for (k, &src) in order.iter().enumerate() {
        let col: Vec<f64> = eigvecs.iter().map(|r| r[src]).collect();
        let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (f, x) in col.into_iter().enumerate() {
            loadings[f][k] = sign * x;
        }
    }
    let explained_variance: Vec<f64> = order.iter().map(|&i| eigvals[i].max(0.0)).collect();
    let scores = rows
        .iter()
        .map(|r| {
            (0..p)
                .map(|k| (0..p).map(|f| (r[f] - means[f]) * loadings[f][k]).sum())
                .collect()
        })
        .collect();
    Ok(PcaResult { means, loadings, explained_variance, scores })
}
