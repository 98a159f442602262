//! Correlation screening, rank-sum genre tests and principal components.

mod correlation;
mod pca;
mod wilcoxon;

use serde::{Deserialize, Serialize};

use crate::features::Dataset;
use crate::Result;

pub use correlation::{
    correlation_screen, measure_columns, pearson, pearson_matrix, CorrelationMatrix, Exclusion, ScreenOutcome,
};
pub use pca::{covariance, jacobi_eigen, pca, PcaResult};
pub use wilcoxon::{wilcoxon_ranksum, wilcoxon_ranksum_with, Method, WilcoxonResult, EXACT_MAX_N};

/// Default absolute-correlation threshold for screening.
pub const DEFAULT_CORRELATION_THRESHOLD: f64 = 0.9;

/// Screening order: density first, then the remaining retained features,
/// then the measures expected to be redundant with density.
pub const KEEP_PRIORITY: [&str; 16] = [
    "density",
    "avg_clustering",
    "diameter",
    "max_betweenness",
    "max_deg_over_n_minus_1",
    "high_speech",
    "medium_speech",
    "low_speech",
    "high_wdeg",
    "medium_wdeg",
    "low_wdeg",
    "avg_character_speech",
    "avg_char_per_scene_norm",
    "avg_path_length",
    "avg_deg_max_deg_ratio",
    "n_components",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTest {
    pub feature: String,
    pub result: WilcoxonResult,
}

impl FeatureTest {
    pub fn significant(&self, alpha: f64) -> bool {
        self.result.p_value < alpha
    }
}

/// Comedy-vs-rest rank-sum test for every column of the dataset.
pub fn genre_tests(ds: &Dataset) -> Result<Vec<FeatureTest>> {
    let labels = ds.labels();
    ds.feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (mut comedy, mut rest) = (Vec::new(), Vec::new());
            for (row, &c) in ds.raw.iter().zip(&labels) {
                if c {
                    comedy.push(row[j]);
                } else {
                    rest.push(row[j]);
                }
            }
            Ok(FeatureTest { feature: name.clone(), result: wilcoxon_ranksum(&comedy, &rest)? })
        })
        .collect()
}
