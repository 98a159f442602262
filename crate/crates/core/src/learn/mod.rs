//! Linear SVM classification with leave-one-out evaluation and recursive
//! feature elimination.

mod svm;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Genre;
use crate::features::{Dataset, SIZE_MEASURE};
use crate::{Error, Result};

pub use svm::{train_svm, train_svm_with, LinearModel, SvmParams, DEFAULT_C, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Counts with comedy as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub comedy_as_comedy: usize,
    pub comedy_as_tragedy: usize,
    pub tragedy_as_comedy: usize,
    pub tragedy_as_tragedy: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.comedy_as_comedy + self.comedy_as_tragedy + self.tragedy_as_comedy + self.tragedy_as_tragedy
    }

    fn add(&mut self, actual: bool, predicted: bool) {
        match (actual, predicted) {
            (true, true) => self.comedy_as_comedy += 1,
            (true, false) => self.comedy_as_tragedy += 1,
            (false, true) => self.tragedy_as_comedy += 1,
            (false, false) => self.tragedy_as_tragedy += 1,
        }
    }

    fn class_metrics(tp: usize, fn_: usize, fp: usize) -> ClassMetrics {
        let ratio = |a: usize, b: usize| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
        let precision = ratio(tp, fp);
        let recall = ratio(tp, fn_);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        ClassMetrics { precision, recall, f1, support: tp + fn_ }
    }

    pub fn comedy(&self) -> ClassMetrics {
        Self::class_metrics(self.comedy_as_comedy, self.comedy_as_tragedy, self.tragedy_as_comedy)
    }

    pub fn tragedy(&self) -> ClassMetrics {
        Self::class_metrics(self.tragedy_as_tragedy, self.tragedy_as_comedy, self.comedy_as_tragedy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub play_id: String,
    pub actual: Genre,
    pub predicted: Genre,
    pub decision: f64,
    /// The training fold held a single class; the prediction is that class.
    pub degenerate_fold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub regularization_c: f64,
    pub feature_names: Vec<String>,
    pub confusion: Confusion,
    pub comedy: ClassMetrics,
    pub tragedy: ClassMetrics,
    /// Share of correctly classified plays.
    pub accuracy: f64,
    /// Mean of the two per-class recalls.
    pub mean_recall: f64,
    pub predictions: Vec<Prediction>,
}

impl ClassificationReport {
    fn from_predictions(c: f64, feature_names: Vec<String>, predictions: Vec<Prediction>) -> Self {
        let mut confusion = Confusion::default();
        for p in &predictions {
            confusion.add(p.actual == Genre::Comedy, p.predicted == Genre::Comedy);
        }
        let comedy = confusion.comedy();
        let tragedy = confusion.tragedy();
        let correct = confusion.comedy_as_comedy + confusion.tragedy_as_tragedy;
        ClassificationReport {
            regularization_c: c,
            feature_names,
            confusion,
            comedy,
            tragedy,
            accuracy: correct as f64 / confusion.total().max(1) as f64,
            mean_recall: (comedy.recall + tragedy.recall) / 2.0,
            predictions,
        }
    }

    /// Plain-text block with per-class precision, recall and F1.
    pub fn summary(&self) -> String {
        let line = |name: &str, m: &ClassMetrics| {
            format!(
                "{name:<8} accuracy (recall) {:.2}  F1 {:.2}  precision {:.2}  n={}",
                m.recall, m.f1, m.precision, m.support
            )
        };
        format!(
            "leave-one-out over {} plays, {} features, C = {}\n{}\n{}\noverall accuracy {:.3}, mean recall {:.3}",
            self.predictions.len(),
            self.feature_names.len(),
            self.regularization_c,
            line("comedy", &self.comedy),
            line("tragedy", &self.tragedy),
            self.accuracy,
            self.mean_recall
        )
    }
}

fn genre_of(positive: bool) -> Genre {
    if positive {
        Genre::Comedy
    } else {
        Genre::Tragedy
    }
}

/// Leave-one-out evaluation: each play is predicted by a model trained on
/// all others. Folds run on the current rayon pool.
pub fn loo_evaluate(ds: &Dataset, c: f64) -> Result<ClassificationReport> {
    loo_evaluate_with(ds, &SvmParams::with_c(c))
}

pub fn loo_evaluate_with(ds: &Dataset, params: &SvmParams) -> Result<ClassificationReport> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {}", params.c)));
    }
    let rows = &ds.matrix;
    let labels = ds.labels();
    if rows.len() < 2 {
        return Err(Error::EmptyInput("leave-one-out needs at least two plays"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dataset"));
    }
    let gram = svm::gram(rows);
    let predictions: Vec<Prediction> = (0..rows.len())
        .into_par_iter()
        .map(|held_out| {
            let idx: Vec<usize> = (0..rows.len()).filter(|&k| k != held_out).collect();
            let positives = idx.iter().filter(|&&k| labels[k]).count();
            let actual = genre_of(labels[held_out]);
            if positives == 0 || positives == idx.len() {
                log::warn!("fold `{}` trains on a single class", ds.play_ids[held_out]);
                let only = positives > 0;
                return Prediction {
                    play_id: ds.play_ids[held_out].clone(),
                    actual,
                    predicted: genre_of(only),
                    decision: if only { 1.0 } else { -1.0 },
                    degenerate_fold: true,
                };
            }
            let model = svm::train_subset(rows, &labels, &gram, &idx, params);
            let decision = model.decision(&rows[held_out]);
            Prediction {
                play_id: ds.play_ids[held_out].clone(),
                actual,
                predicted: genre_of(decision >= 0.0),
                decision,
                degenerate_fold: false,
            }
        })
        .collect();
    Ok(ClassificationReport::from_predictions(params.c, ds.feature_names.clone(), predictions))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeStep {
    /// Features in use at this step.
    pub features: Vec<String>,
    /// Weights of the model trained on the whole dataset, aligned with `features`.
    pub weights: Vec<f64>,
    pub accuracy: f64,
    pub mean_recall: f64,
    /// Feature removed after this step; `None` on the last step.
    pub eliminated: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeTrace {
    pub steps: Vec<RfeStep>,
}

impl RfeTrace {
    /// Features in elimination order (least important first).
    pub fn elimination_order(&self) -> Vec<&str> {
        self.steps.iter().filter_map(|s| s.eliminated.as_deref()).collect()
    }
}

/// Recursive feature elimination. At every step the model is trained on the
/// full dataset to rank features by |weight| and LOO accuracy is recorded;
/// the weakest feature (ties: lexicographically last name) is then removed
/// until one feature remains.
pub fn rfe(ds: &Dataset, c: f64) -> Result<RfeTrace> {
    if ds.n_features() < 2 {
        return Err(Error::InvalidArgument("feature elimination needs at least two features".into()));
    }
    let params = SvmParams::with_c(c);
    let mut current: Vec<String> = ds.feature_names.clone();
    let mut steps = Vec::with_capacity(current.len());
    loop {
        let names: Vec<&str> = current.iter().map(String::as_str).collect();
        let sub = ds.select(&names)?;
        let model = train_svm_with(&sub.matrix, &sub.labels(), &params)?;
        let report = loo_evaluate_with(&sub, &params)?;
        let eliminated = if current.len() > 1 {
            let weakest = (0..current.len())
                .min_by(|&a, &b| {
                    model.weights[a]
                        .abs()
                        .total_cmp(&model.weights[b].abs())
                        .then_with(|| current[b].cmp(&current[a]))
                })
                .unwrap();
            Some(current[weakest].clone())
        } else {
            None
        };
        steps.push(RfeStep {
            features: current.clone(),
            weights: model.weights,
            accuracy: report.accuracy,
            mean_recall: report.mean_recall,
            eliminated: eliminated.clone(),
        });
        match eliminated {
            Some(name) => current.retain(|f| *f != name),
            None => break,
        }
    }
    Ok(RfeTrace { steps })
}

/// Appends the z-scored cast size as an extra column.
pub fn augment_with_size(ds: &Dataset) -> Result<Dataset> {
    let mut out = ds.clone();
    let sizes: Vec<f64> = ds.extras.iter().map(|f| f.n_characters).collect();
    out.push_column(SIZE_MEASURE, sizes)?;
    Ok(out)
}
