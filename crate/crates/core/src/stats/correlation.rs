use serde::{Deserialize, Serialize};

use crate::features::FeatureVector;
use crate::{Error, Result};

/// Pearson coefficient over the rows where both values are finite. `None`
/// when fewer than two such rows exist or either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(a, b) in &pairs {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Symmetric matrix of pairwise Pearson coefficients; `None` marks an
/// undefined coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub feature_names: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.feature_names.iter().position(|n| n == a)?;
        let j = self.feature_names.iter().position(|n| n == b)?;
        self.values[i][j]
    }
}

pub fn pearson_matrix(columns: &[(String, Vec<f64>)]) -> Result<CorrelationMatrix> {
    let rows = columns.first().map_or(0, |c| c.1.len());
    if rows < 2 {
        return Err(Error::EmptyInput("correlation needs at least two rows"));
    }
    if columns.iter().any(|c| c.1.len() != rows) {
        return Err(Error::Dimension("correlation columns differ in length".into()));
    }
    let k = columns.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        values[i][i] = pearson(&columns[i].1, &columns[i].1).map(|_| 1.0);
        for j in (i + 1)..k {
            let r = pearson(&columns[i].1, &columns[j].1);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { feature_names: columns.iter().map(|c| c.0.clone()).collect(), values })
}

/// The named measures of every play as columns.
pub fn measure_columns(features: &[FeatureVector], names: &[&str]) -> Result<Vec<(String, Vec<f64>)>> {
    names
        .iter()
        .map(|&name| {
            let col = features
                .iter()
                .map(|f| f.get(name).ok_or_else(|| Error::InvalidArgument(format!("unknown measure `{name}`"))))
                .collect::<Result<Vec<_>>>()?;
            Ok((name.to_string(), col))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Exclusion {
    /// Correlated above the threshold with an already kept feature.
    Redundant { with: String, r: f64 },
    /// Correlated above the threshold with the cast size.
    SizeDependent { r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenOutcome {
    pub threshold: f64,
    pub kept: Vec<String>,
    pub excluded: Vec<(String, Exclusion)>,
}

impl ScreenOutcome {
    pub fn is_excluded(&self, name: &str) -> bool {
        self.excluded.iter().any(|(n, _)| n == name)
    }
}

/// Greedy redundancy filter.
///
/// Features are visited in `keep_priority` order. A feature whose absolute
/// correlation with `size_feature` exceeds `threshold` is dropped; otherwise
/// it is dropped if it exceeds `threshold` against any feature kept so far.
/// Undefined coefficients never trigger an exclusion.
pub fn correlation_screen(
    matrix: &CorrelationMatrix,
    threshold: f64,
    keep_priority: &[&str],
    size_feature: Option<&str>,
) -> Result<ScreenOutcome> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("correlation threshold {threshold} outside (0, 1]")));
    }
    let mut kept: Vec<String> = Vec::new();
    let mut excluded = Vec::new();
    for &name in keep_priority {
        if !matrix.feature_names.iter().any(|n| n == name) {
            return Err(Error::InvalidArgument(format!("`{name}` not in correlation matrix")));
        }
        if let Some(r) = size_feature.and_then(|s| matrix.get(name, s)) {
            if r.abs() > threshold {
                excluded.push((name.to_string(), Exclusion::SizeDependent { r }));
                continue;
            }
        }
        let clash = kept
            .iter()
            .find_map(|k| matrix.get(name, k).filter(|r| r.abs() > threshold).map(|r| (k.clone(), r)));
        match clash {
            Some((with, r)) => excluded.push((name.to_string(), Exclusion::Redundant { with, r })),
            None => kept.push(name.to_string()),
        }
    }
    Ok(ScreenOutcome { threshold, kept, excluded })
}
