//! Act-removal experiments: how much does a single act contribute to the
//! density of a play's network?

use std::collections::BTreeMap;

use log::info;
use serde::{Deserialize, Serialize};

use crate::corpus::{Genre, Play};
use crate::graph::{build_from_scenes, build_graph, compute_metrics, CharacterGraph};
use crate::stats::{wilcoxon_ranksum, WilcoxonResult};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRecord {
    pub play_id: String,
    pub genre: Genre,
    pub act_removed: usize,
    pub density_full: f64,
    pub density_ablated: f64,
    /// `density_full − density_ablated`; positive when the act adds density.
    pub delta: f64,
}

/// Co-occurrence graph over every scene outside `act`.
pub fn ablate_act(play: &Play, act: usize) -> Result<CharacterGraph> {
    if play.act_count < 2 || act == 0 || act > play.act_count {
        return Err(Error::ActOutOfRange { act, act_count: play.act_count });
    }
    Ok(build_from_scenes(play.scenes.iter().filter(|s| s.act_index != act)))
}

fn density(g: &CharacterGraph) -> Result<f64> {
    Ok(compute_metrics(g)?.density)
}

/// Density with and without `act`, each on its own node set.
pub fn ablation_record(play: &Play, act: usize) -> Result<AblationRecord> {
    let ablated = ablate_act(play, act)?;
    let density_full = density(&build_graph(play))?;
    let density_ablated = density(&ablated)?;
    Ok(AblationRecord {
        play_id: play.id.clone(),
        genre: play.genre,
        act_removed: act,
        density_full,
        density_ablated,
        delta: density_full - density_ablated,
    })
}

/// Five-number summary with linearly interpolated quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl FiveNumber {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(FiveNumber {
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSummary {
    pub genre: Genre,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub five_number: FiveNumber,
}

fn summarize_by_genre<'a>(records: impl Iterator<Item = &'a AblationRecord>) -> Vec<DeltaSummary> {
    let mut by_genre: BTreeMap<Genre, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_genre.entry(r.genre).or_default().push(r.delta);
    }
    by_genre
        .into_iter()
        .map(|(genre, deltas)| {
            let five_number = FiveNumber::of(&deltas).expect("non-empty group");
            DeltaSummary {
                genre,
                n: deltas.len(),
                mean: deltas.iter().sum::<f64>() / deltas.len() as f64,
                median: five_number.median,
                five_number,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub play_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LastActEffect {
    pub records: Vec<AblationRecord>,
    pub skipped: Vec<Skipped>,
    pub summaries: Vec<DeltaSummary>,
    /// Comedy vs tragedy densities of the full plays.
    pub test_full: Option<WilcoxonResult>,
    /// Comedy vs tragedy densities with the last act removed.
    pub test_ablated: Option<WilcoxonResult>,
}

fn genre_test(records: &[AblationRecord], value: impl Fn(&AblationRecord) -> f64) -> Option<WilcoxonResult> {
    let pick = |g: Genre| records.iter().filter(|r| r.genre == g).map(&value).collect::<Vec<_>>();
    wilcoxon_ranksum(&pick(Genre::Comedy), &pick(Genre::Tragedy)).ok()
}

/// Removes the final act of every play. Plays with a single act, or whose
/// remaining network has fewer than two characters, are skipped.
pub fn last_act_effect(corpus: &[Play]) -> LastActEffect {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for play in corpus {
        match ablation_record(play, play.act_count) {
            Ok(r) => records.push(r),
            Err(e) => {
                info!("skipping `{}` in act ablation: {e}", play.id);
                skipped.push(Skipped { play_id: play.id.clone(), reason: e.to_string() });
            }
        }
    }
    LastActEffect {
        summaries: summarize_by_genre(records.iter()),
        test_full: genre_test(&records, |r| r.density_full),
        test_ablated: genre_test(&records, |r| r.density_ablated),
        records,
        skipped,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActSummary {
    pub act: usize,
    pub summaries: Vec<DeltaSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerActEffect {
    pub acts_required: usize,
    pub n_plays: usize,
    pub records: Vec<AblationRecord>,
    pub skipped: Vec<Skipped>,
    pub acts: Vec<ActSummary>,
}

/// Removes each act in turn from every play with exactly `acts_required` acts.
pub fn per_act_effect(corpus: &[Play], acts_required: usize) -> Result<PerActEffect> {
    if acts_required < 2 {
        return Err(Error::InvalidArgument(format!("acts_required must be at least 2, got {acts_required}")));
    }
    let selected: Vec<&Play> = corpus.iter().filter(|p| p.act_count == acts_required).collect();
    if selected.is_empty() {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for p in corpus {
            *counts.entry(p.act_count).or_default() += 1;
        }
        let available = if counts.is_empty() {
            "none".to_string()
        } else {
            counts.iter().map(|(a, n)| format!("{a} acts: {n}")).collect::<Vec<_>>().join(", ")
        };
        return Err(Error::EmptyRestriction { required: acts_required, available });
    }
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for play in &selected {
        for act in 1..=acts_required {
            match ablation_record(play, act) {
                Ok(r) => records.push(r),
                Err(e) => skipped.push(Skipped { play_id: play.id.clone(), reason: format!("act {act}: {e}") }),
            }
        }
    }
    let acts = (1..=acts_required)
        .map(|act| ActSummary { act, summaries: summarize_by_genre(records.iter().filter(|r| r.act_removed == act)) })
        .collect();
    Ok(PerActEffect { acts_required, n_plays: selected.len(), records, skipped, acts })
}
