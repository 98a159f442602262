//! Per-play structural measures and the z-scored feature table.
//!
//! Thirteen measures enter classification. Four more (average path length,
//! average/maximum degree ratio, component count and cast size) are carried
//! alongside for correlation analysis only.

mod kmeans;

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Genre, Play};
use crate::graph::{build_graph, compute_metrics, weighted_degrees, CharacterGraph, GraphMetrics};
use crate::{Error, Result};

pub use kmeans::{kmeans3_1d, Tier};

/// Minimum number of speech acts (exclusive) for a character to count
/// towards the average speech length.
pub const SPEECH_ACT_THRESHOLD: usize = 10;

/// Column order of the classification features.
pub const RETAINED_FEATURES: [&str; 13] = [
    "avg_clustering",
    "density",
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
];

/// Measures computed but excluded from classification by correlation screening.
pub const EXCLUDED_MEASURES: [&str; 3] = ["avg_path_length", "avg_deg_max_deg_ratio", "n_components"];

/// Cast size, used as a size covariate.
pub const SIZE_MEASURE: &str = "n_characters";

/// All sixteen measures followed by the cast size.
pub fn all_measures() -> Vec<&'static str> {
    RETAINED_FEATURES
        .iter()
        .chain(EXCLUDED_MEASURES.iter())
        .chain(std::iter::once(&SIZE_MEASURE))
        .copied()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trichotomy {
    pub high: f64,
    pub medium: f64,
    pub low: f64,
}

impl Trichotomy {
    fn from_tiers(tiers: &[Tier]) -> Self {
        let n = tiers.len() as f64;
        let count = |t| tiers.iter().filter(|&&x| x == t).count() as f64 / n;
        Trichotomy { high: count(Tier::High), medium: count(Tier::Medium), low: count(Tier::Low) }
    }
}

fn trichotomy_over(values: &[f64]) -> Result<Trichotomy> {
    Ok(Trichotomy::from_tiers(&kmeans3_1d(values)?))
}

/// Shares of non-group characters in the high/medium/low speech-volume clusters.
/// On-stage characters who never speak count with zero words.
pub fn speech_trichotomy(play: &Play) -> Result<Trichotomy> {
    let totals = play.speech_totals();
    let individuals = play.on_stage_individuals();
    let values: Vec<f64> = individuals
        .iter()
        .map(|id| totals.get(id).map_or(0.0, |&(words, _)| words as f64))
        .collect();
    if !individuals.iter().any(|id| totals.contains_key(id)) {
        return Err(Error::NoQualifyingCharacters(play.id.clone()));
    }
    trichotomy_over(&values)
}

/// Shares of non-group characters in the high/medium/low weighted-degree clusters.
pub fn wdeg_trichotomy(play: &Play, g: &CharacterGraph) -> Result<Trichotomy> {
    let wdeg = weighted_degrees(g);
    let values: Vec<f64> = play
        .on_stage_individuals()
        .iter()
        .filter_map(|id| wdeg.get(*id).copied())
        .collect();
    if values.is_empty() {
        return Err(Error::NoQualifyingCharacters(play.id.clone()));
    }
    trichotomy_over(&values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageSpeech {
    pub value: f64,
    /// Set when no character exceeded the speech-act threshold and the mean
    /// was taken over every speaking character instead.
    pub fallback: bool,
}

/// Mean total word count of characters with more than ten speech acts.
pub fn avg_character_speech(play: &Play) -> AverageSpeech {
    let totals = play.speech_totals();
    let mean = |xs: Vec<usize>| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<usize>() as f64 / xs.len() as f64
        }
    };
    let qualifying: Vec<usize> = totals
        .values()
        .filter(|&&(_, acts)| acts > SPEECH_ACT_THRESHOLD)
        .map(|&(words, _)| words)
        .collect();
    if qualifying.is_empty() {
        AverageSpeech { value: mean(totals.values().map(|&(w, _)| w).collect()), fallback: true }
    } else {
        AverageSpeech { value: mean(qualifying), fallback: false }
    }
}

/// Mean scene cast size divided by the number of scenes.
pub fn avg_char_per_scene_norm(play: &Play) -> Result<f64> {
    let n = play.scenes.len();
    if n == 0 {
        return Err(Error::EmptyInput("play has no scenes"));
    }
    let total: usize = play.scenes.iter().map(|s| s.present_ids.len()).sum();
    Ok(total as f64 / n as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub play_id: String,
    pub avg_clustering: f64,
    pub density: f64,
    pub diameter: f64,
    pub max_betweenness: f64,
    pub max_deg_over_n_minus_1: f64,
    pub high_speech: f64,
    pub medium_speech: f64,
    pub low_speech: f64,
    pub high_wdeg: f64,
    pub medium_wdeg: f64,
    pub low_wdeg: f64,
    pub avg_character_speech: f64,
    pub avg_char_per_scene_norm: f64,
    pub avg_path_length: Option<f64>,
    pub avg_deg_max_deg_ratio: f64,
    pub n_components: f64,
    pub n_characters: f64,
    pub avg_speech_fallback: bool,
}

impl FeatureVector {
    /// Looks up a measure by column name. `avg_path_length` reads as NaN
    /// when undefined.
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "avg_clustering" => self.avg_clustering,
            "density" => self.density,
            "diameter" => self.diameter,
            "max_betweenness" => self.max_betweenness,
            "max_deg_over_n_minus_1" => self.max_deg_over_n_minus_1,
            "high_speech" => self.high_speech,
            "medium_speech" => self.medium_speech,
            "low_speech" => self.low_speech,
            "high_wdeg" => self.high_wdeg,
            "medium_wdeg" => self.medium_wdeg,
            "low_wdeg" => self.low_wdeg,
            "avg_character_speech" => self.avg_character_speech,
            "avg_char_per_scene_norm" => self.avg_char_per_scene_norm,
            "avg_path_length" => self.avg_path_length.unwrap_or(f64::NAN),
            "avg_deg_max_deg_ratio" => self.avg_deg_max_deg_ratio,
            "n_components" => self.n_components,
            "n_characters" => self.n_characters,
            _ => return None,
        })
    }

    pub fn retained(&self) -> [f64; 13] {
        RETAINED_FEATURES.map(|n| self.get(n).unwrap())
    }
}

/// Assembles a feature vector from precomputed parts.
pub fn feature_vector(play: &Play, g: &CharacterGraph, m: &GraphMetrics) -> Result<FeatureVector> {
    let speech = speech_trichotomy(play)?;
    let wdeg = wdeg_trichotomy(play, g)?;
    let avg_speech = avg_character_speech(play);
    Ok(FeatureVector {
        play_id: play.id.clone(),
        avg_clustering: m.avg_clustering,
        density: m.density,
        diameter: m.diameter as f64,
        max_betweenness: m.max_betweenness,
        max_deg_over_n_minus_1: m.max_deg_over_n_minus_1,
        high_speech: speech.high,
        medium_speech: speech.medium,
        low_speech: speech.low,
        high_wdeg: wdeg.high,
        medium_wdeg: wdeg.medium,
        low_wdeg: wdeg.low,
        avg_character_speech: avg_speech.value,
        avg_char_per_scene_norm: avg_char_per_scene_norm(play)?,
        avg_path_length: m.avg_path_length,
        avg_deg_max_deg_ratio: m.avg_deg_max_deg_ratio,
        n_components: m.n_components as f64,
        n_characters: m.n_nodes as f64,
        avg_speech_fallback: avg_speech.fallback,
    })
}

/// Builds the network of `play` and computes every measure.
pub fn extract_features(play: &Play) -> Result<FeatureVector> {
    let g = build_graph(play);
    let m = compute_metrics(&g)?;
    feature_vector(play, &g, &m)
}

/// Z-scores a column with the sample (n − 1) standard deviation. Constant
/// columns map to zeros; the second value reports that case.
pub fn zscore(column: &[f64]) -> (Vec<f64>, bool) {
    let n = column.len();
    if n < 2 || column.iter().all(|&v| v == column[0]) {
        return (vec![0.0; n], true);
    }
    let mean = column.iter().sum::<f64>() / n as f64;
    let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    (column.iter().map(|v| (v - mean) / sd).collect(), false)
}

/// Feature matrix with binary genre labels. `matrix` holds z-scores; `raw`
/// the untransformed values in the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub play_ids: Vec<String>,
    pub genres: Vec<Genre>,
    pub raw: Vec<Vec<f64>>,
    pub matrix: Vec<Vec<f64>>,
    /// Full measure vectors, including the columns not used for classification.
    pub extras: Vec<FeatureVector>,
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.play_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// `true` for comedies, the positive class.
    pub fn labels(&self) -> Vec<bool> {
        self.genres.iter().map(|g| *g == Genre::Comedy).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.feature_names.iter().position(|n| n == name)?;
        Some(self.matrix.iter().map(|r| r[j]).collect())
    }

    pub fn raw_column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.feature_names.iter().position(|n| n == name)?;
        Some(self.raw.iter().map(|r| r[j]).collect())
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Dataset> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown feature `{n}`")))
            })
            .collect::<Result<_>>()?;
        let pick = |rows: &Vec<Vec<f64>>| rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect();
        Ok(Dataset {
            feature_names: names.iter().map(|s| s.to_string()).collect(),
            raw: pick(&self.raw),
            matrix: pick(&self.matrix),
            ..self.clone()
        })
    }

    /// Appends a raw column and its z-scores.
    pub fn push_column(&mut self, name: &str, raw: Vec<f64>) -> Result<()> {
        if raw.len() != self.n_rows() {
            return Err(Error::Dimension(format!("column `{name}` has {} rows, expected {}", raw.len(), self.n_rows())));
        }
        let (z, constant) = zscore(&raw);
        if constant {
            warn!("column `{name}` is constant; z-scores set to 0");
            self.warnings.push(format!("constant column `{name}`"));
        }
        self.feature_names.push(name.to_string());
        for ((r, m), (v, zv)) in self.raw.iter_mut().zip(self.matrix.iter_mut()).zip(raw.into_iter().zip(z)) {
            r.push(v);
            m.push(zv);
        }
        Ok(())
    }
}

/// Z-scores the named measures over the corpus and attaches genre labels.
pub fn assemble_columns(features: &[FeatureVector], genres: &[Genre], columns: &[&str]) -> Result<Dataset> {
    if features.len() != genres.len() {
        return Err(Error::Dimension(format!("{} feature rows vs {} labels", features.len(), genres.len())));
    }
    if features.len() < 2 {
        return Err(Error::EmptyInput("at least two plays are needed to z-score features"));
    }
    let mut ds = Dataset {
        feature_names: Vec::new(),
        play_ids: features.iter().map(|f| f.play_id.clone()).collect(),
        genres: genres.to_vec(),
        raw: vec![Vec::with_capacity(columns.len()); features.len()],
        matrix: vec![Vec::with_capacity(columns.len()); features.len()],
        extras: features.to_vec(),
        warnings: Vec::new(),
    };
    for &name in columns {
        let col: Vec<f64> = features
            .iter()
            .map(|f| f.get(name).ok_or_else(|| Error::InvalidArgument(format!("unknown measure `{name}`"))))
            .collect::<Result<_>>()?;
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature column"));
        }
        ds.push_column(name, col)?;
    }
    Ok(ds)
}

/// Dataset over the thirteen retained features.
pub fn assemble(features: &[FeatureVector], genres: &[Genre]) -> Result<Dataset> {
    assemble_columns(features, genres, &RETAINED_FEATURES)
}

/// Extracts every play's measures (in parallel) and assembles the retained
/// columns. Plays whose measures cannot be computed are left out with a
/// warning recorded on the dataset.
pub fn build_dataset(plays: &[Play]) -> Result<Dataset> {
    let extracted: Vec<Result<FeatureVector>> = plays.par_iter().map(extract_features).collect();
    let mut features = Vec::with_capacity(plays.len());
    let mut genres = Vec::with_capacity(plays.len());
    let mut skipped = Vec::new();
    for (play, fv) in plays.iter().zip(extracted) {
        match fv {
            Ok(fv) => {
                features.push(fv);
                genres.push(play.genre);
            }
            Err(e) => {
                warn!("skipping `{}`: {e}", play.id);
                skipped.push(format!("skipped `{}`: {e}", play.id));
            }
        }
    }
    let mut ds = assemble(&features, &genres)?;
    ds.warnings.extend(skipped);
    Ok(ds)
}

/// Genre-wise means of z-scored columns, keyed by feature name.
pub fn genre_means(ds: &Dataset) -> BTreeMap<String, (f64, f64)> {
    let labels = ds.labels();
    ds.feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (mut c, mut nc, mut t, mut nt) = (0.0, 0usize, 0.0, 0usize);
            for (row, &is_comedy) in ds.matrix.iter().zip(&labels) {
                if is_comedy {
                    c += row[j];
                    nc += 1;
                } else {
                    t += row[j];
                    nt += 1;
                }
            }
            (name.clone(), (c / nc.max(1) as f64, t / nt.max(1) as f64))
        })
        .collect()
}
