use std::collections::BTreeMap;
use std::fs;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use dramanet::ablate::{last_act_effect, per_act_effect, DeltaSummary};
use dramanet::corpus::{corpus_from_json, corpus_to_json, drop_reason, load_corpus_dir, GenreManifest, Play};
use dramanet::features::{all_measures, assemble_columns, extract_features, Dataset, FeatureVector, RETAINED_FEATURES};
use dramanet::graph::{build_graph, write_edge_list, write_gexf};
use dramanet::learn::{augment_with_size, loo_evaluate, rfe as run_rfe};
use dramanet::stats::{correlation_screen, genre_tests, measure_columns, pca as run_pca, pearson_matrix, ScreenOutcome, KEEP_PRIORITY};
use dramanet::Error;

use crate::output::{Artifacts, Cell, Table};
use crate::{Failure, RunConfig};

const CORPUS: &str = "corpus.json";
const DATASET: &str = "dataset.json";
const SCREENING: &str = "screening.json";
const ALPHA: f64 = 0.05;

fn artifacts(cfg: &RunConfig) -> Artifacts {
    Artifacts::new(&cfg.output_dir, cfg.format)
}

fn read_prerequisite(out: &Artifacts, name: &str, produced_by: &str) -> Result<String, Failure> {
    let path = out.path(name);
    fs::read_to_string(&path).map_err(|e| {
        Failure::new(
            Failure::MISSING_PREREQUISITE,
            format!("cannot read {} ({e}); run `dramanet {produced_by}` first", path.display()),
        )
    })
}

// With --corpus-dir given, a missing upstream artifact is produced on the
// spot instead of failing.
fn load_corpus(cfg: &RunConfig, out: &Artifacts) -> Result<Vec<Play>, Failure> {
    if cfg.corpus_dir.is_some() && !out.path(CORPUS).exists() {
        info!("{CORPUS} missing, ingesting first");
        ingest(cfg)?;
    }
    Ok(corpus_from_json(&read_prerequisite(out, CORPUS, "ingest")?)?)
}

fn load_dataset(cfg: &RunConfig, out: &Artifacts) -> Result<Dataset, Failure> {
    if cfg.corpus_dir.is_some() && !out.path(DATASET).exists() {
        info!("{DATASET} missing, computing features first");
        features(cfg)?;
    }
    serde_json::from_str(&read_prerequisite(out, DATASET, "features")?).map_err(|e| Failure::other(e.to_string()))
}

#[derive(Serialize)]
struct ParseFailure {
    file: String,
    error: String,
}

#[derive(Serialize)]
struct DroppedPlay {
    play_id: String,
    reason: &'static str,
}

#[derive(Serialize)]
struct IngestSummary {
    files: usize,
    parse_failures: Vec<ParseFailure>,
    parsed: usize,
    manifest_overrides: usize,
    kept: usize,
    dropped: usize,
    drop_reasons: BTreeMap<&'static str, usize>,
    dropped_plays: Vec<DroppedPlay>,
    genres: BTreeMap<&'static str, usize>,
    parser_warnings: usize,
}

pub fn ingest(cfg: &RunConfig) -> Result<(), Failure> {
    let dir = cfg
        .corpus_dir
        .as_deref()
        .ok_or_else(|| Failure::new(Failure::UNREADABLE_INPUT, "ingest needs --corpus-dir"))?;
    let loaded = load_corpus_dir(dir, cfg.history_as_tragedy)
        .map_err(|e| Failure::new(Failure::UNREADABLE_INPUT, format!("{}: {e}", dir.display())))?;
    for (path, e) in &loaded.failures {
        warn!("{}: {e}", path.display());
    }
    let mut plays = loaded.plays;
    let mut overrides = 0;
    if let Some(path) = &cfg.manifest {
        let file = fs::File::open(path).map_err(|e| Failure::new(Failure::UNREADABLE_INPUT, format!("{}: {e}", path.display())))?;
        let manifest = GenreManifest::from_reader(file)?;
        for p in &mut plays {
            if manifest.apply(p, cfg.history_as_tragedy) {
                overrides += 1;
            }
        }
    }

    let mut kept = Vec::new();
    let mut dropped_plays = Vec::new();
    let mut drop_reasons = BTreeMap::new();
    let parsed = plays.len();
    for p in plays {
        match drop_reason(&p, cfg.min_characters, cfg.min_scenes) {
            None => kept.push(p),
            Some(r) => {
                *drop_reasons.entry(r.as_str()).or_insert(0) += 1;
                dropped_plays.push(DroppedPlay { play_id: p.id.clone(), reason: r.as_str() });
            }
        }
    }
    let mut genres = BTreeMap::new();
    for p in &kept {
        *genres.entry(p.genre.as_str()).or_insert(0) += 1;
    }
    let summary = IngestSummary {
        files: parsed + loaded.failures.len(),
        parse_failures: loaded
            .failures
            .iter()
            .map(|(p, e)| ParseFailure { file: p.display().to_string(), error: e.to_string() })
            .collect(),
        parsed,
        manifest_overrides: overrides,
        kept: kept.len(),
        dropped: dropped_plays.len(),
        drop_reasons,
        dropped_plays,
        genres,
        parser_warnings: loaded.warnings.len(),
    };
    let out = artifacts(cfg);
    out.write_json("ingest_summary.json", &summary)?;
    println!(
        "{} files: {} parsed, {} failed; kept {}, dropped {}",
        summary.files,
        summary.parsed,
        summary.parse_failures.len(),
        summary.kept,
        summary.dropped
    );
    if kept.is_empty() {
        let counts: Vec<String> = summary.drop_reasons.iter().map(|(r, n)| format!("{r}: {n}")).collect();
        return Err(Failure::new(
            Failure::EMPTY_CORPUS,
            format!("no play passed the corpus filters ({})", if counts.is_empty() { "no plays parsed".into() } else { counts.join(", ") }),
        ));
    }
    out.write_bytes(CORPUS, corpus_to_json(&kept)?.as_bytes())?;
    Ok(())
}

fn measures(plays: &[Play]) -> (Vec<FeatureVector>, Vec<&Play>) {
    let results: Vec<Result<FeatureVector, Error>> = plays.par_iter().map(extract_features).collect();
    let mut features = Vec::new();
    let mut used = Vec::new();
    for (play, r) in plays.iter().zip(results) {
        match r {
            Ok(f) => {
                features.push(f);
                used.push(play);
            }
            Err(e) => warn!("skipping `{}`: {e}", play.id),
        }
    }
    (features, used)
}

pub fn features(cfg: &RunConfig) -> Result<(), Failure> {
    let out = artifacts(cfg);
    let plays = load_corpus(cfg, &out)?;
    let (features, used) = measures(&plays);
    let genres: Vec<_> = used.iter().map(|p| p.genre).collect();

    let names = all_measures();
    let mut table = Table::new(["play_id", "genre"].into_iter().chain(names.iter().copied()).chain(["avg_speech_fallback"]));
    for (f, g) in features.iter().zip(&genres) {
        let mut row: Vec<Cell> = vec![f.play_id.as_str().into(), g.as_str().into()];
        row.extend(names.iter().map(|n| Cell::Num(f.get(n).unwrap())));
        row.push(if f.avg_speech_fallback { "true" } else { "false" }.into());
        table.push(row);
    }
    out.write_table("measures", &table)?;

    // screening, when it has been run, may remove retained features
    let screened: Option<ScreenOutcome> = match fs::read_to_string(out.path(SCREENING)) {
        Ok(s) => Some(serde_json::from_str(&s).map_err(|e| Failure::other(format!("{SCREENING}: {e}")))?),
        Err(_) => None,
    };
    let columns: Vec<&str> = RETAINED_FEATURES
        .iter()
        .copied()
        .filter(|n| screened.as_ref().is_none_or(|s| !s.is_excluded(n)))
        .collect();
    if columns.is_empty() {
        return Err(Failure::other("screening excluded every feature"));
    }
    let ds = assemble_columns(&features, &genres, &columns)?;
    for w in &ds.warnings {
        warn!("{w}");
    }
    let mut table = Table::new(["play_id", "genre"].into_iter().chain(columns.iter().copied()));
    for ((id, g), row) in ds.play_ids.iter().zip(&ds.genres).zip(&ds.matrix) {
        let mut cells: Vec<Cell> = vec![id.as_str().into(), g.as_str().into()];
        cells.extend(row.iter().map(|&v| Cell::Num(v)));
        table.push(cells);
    }
    out.write_table("features", &table)?;
    out.write_json(DATASET, &ds)?;
    println!("{} plays, {} features", ds.n_rows(), ds.n_features());
    Ok(())
}

pub fn correlate(cfg: &RunConfig) -> Result<(), Failure> {
    let out = artifacts(cfg);
    let plays = load_corpus(cfg, &out)?;
    let (features, _) = measures(&plays);
    let names = all_measures();
    let matrix = pearson_matrix(&measure_columns(&features, &names)?)?;
    let mut table = Table::new(std::iter::once("feature").chain(names.iter().copied()));
    for (name, row) in matrix.feature_names.iter().zip(&matrix.values) {
        let mut cells: Vec<Cell> = vec![name.as_str().into()];
        cells.extend(row.iter().map(|&r| Cell::from(r)));
        table.push(cells);
    }
    out.write_table("correlation", &table)?;
    let screen = correlation_screen(&matrix, cfg.correlation_threshold, &KEEP_PRIORITY, Some(dramanet::features::SIZE_MEASURE))?;
    out.write_json(SCREENING, &screen)?;
    println!("kept {} of {} measures at |r| > {}", screen.kept.len(), KEEP_PRIORITY.len(), screen.threshold);
    for (name, why) in &screen.excluded {
        println!("  excluded {name}: {why:?}");
    }
    Ok(())
}

pub fn test(cfg: &RunConfig) -> Result<(), Failure> {
    let out = artifacts(cfg);
    let ds = load_dataset(cfg, &out)?;
    let tests = genre_tests(&ds)?;
    let mut table = Table::new(["feature", "U", "p_value", "significant@0.05"]);
    for t in &tests {
        table.push(vec![
            t.feature.as_str().into(),
            t.result.statistic_u.into(),
            t.result.p_value.into(),
            if t.significant(ALPHA) { "true" } else { "false" }.into(),
        ]);
        println!("{:<26} U = {:<8} p = {:.3e}", t.feature, t.result.statistic_u, t.result.p_value);
    }
    out.write_table("wilcoxon", &table)?;
    Ok(())
}

pub fn pca(cfg: &RunConfig) -> Result<(), Failure> {
    let out = artifacts(cfg);
    let ds = load_dataset(cfg, &out)?;
    let r = run_pca(&ds.matrix)?;
    let pcs: Vec<String> = (1..=r.explained_variance.len()).map(|k| format!("PC{k}")).collect();

    let mut scores = Table::new(["play_id", "genre"].into_iter().map(String::from).chain(pcs.iter().cloned()));
    for ((id, g), row) in ds.play_ids.iter().zip(&ds.genres).zip(&r.scores) {
        let mut cells: Vec<Cell> = vec![id.as_str().into(), g.as_str().into()];
        cells.extend(row.iter().map(|&v| Cell::Num(v)));
        scores.push(cells);
    }
    out.write_table("pca_scores", &scores)?;

    let mut loadings = Table::new(std::iter::once("feature".to_string()).chain(pcs.iter().cloned()));
    for (name, row) in ds.feature_names.iter().zip(&r.loadings) {
        let mut cells: Vec<Cell> = vec![name.as_str().into()];
        cells.extend(row.iter().map(|&v| Cell::Num(v)));
        loadings.push(cells);
    }
    out.write_table("pca_loadings", &loadings)?;

    let total: f64 = r.explained_variance.iter().sum();
    let mut variance = Table::new(["component", "variance", "share"]);
    for (pc, &v) in pcs.iter().zip(&r.explained_variance) {
        variance.push(vec![pc.as_str().into(), v.into(), (v / total).into()]);
    }
    out.write_table("pca_variance", &variance)?;
    println!("PC1 {:.1}%, PC2 {:.1}% of variance", 100.0 * r.explained_variance[0] / total, 100.0 * r.explained_variance[1] / total);
    Ok(())
}

fn with_size_suffix(stem: &str, with_size: bool) -> String {
    if with_size {
        format!("{stem}_with_size")
    } else {
        stem.to_string()
    }
}

pub fn classify(cfg: &RunConfig, with_size: bool) -> Result<(), Failure> {
    let out = artifacts(cfg);
    let mut ds = load_dataset(cfg, &out)?;
    if with_size {
        ds = augment_with_size(&ds)?;
    }
    let report = loo_evaluate(&ds, cfg.c)?;
    out.write_json(&format!("{}.json", with_size_suffix("classification", with_size)), &report)?;
    let mut table = Table::new(["play_id", "actual", "predicted", "decision", "degenerate_fold"]);
    for p in &report.predictions {
        table.push(vec![
            p.play_id.as_str().into(),
            p.actual.as_str().into(),
            p.predicted.as_str().into(),
            p.decision.into(),
            if p.degenerate_fold { "true" } else { "false" }.into(),
        ]);
    }
    out.write_table(&with_size_suffix("predictions", with_size), &table)?;
    println!("{}", report.summary());
    Ok(())
}

pub fn rfe(cfg: &RunConfig, with_size: bool) -> Result<(), Failure> {
    let out = artifacts(cfg);
    let mut ds = load_dataset(cfg, &out)?;
    if with_size {
        ds = augment_with_size(&ds)?;
    }
    let trace = run_rfe(&ds, cfg.c)?;
    let mut table = Table::new(["step", "eliminated", "accuracy", "n_features", "mean_recall", "remaining"]);
    for (k, s) in trace.steps.iter().enumerate() {
        table.push(vec![
            (k + 1).into(),
            s.eliminated.clone().map_or(Cell::Missing, Cell::Text),
            s.accuracy.into(),
            s.features.len().into(),
            s.mean_recall.into(),
            s.features.join(";").into(),
        ]);
        println!(
            "{:>2} features  accuracy {:.3}  mean recall {:.3}  drop {}",
            s.features.len(),
            s.accuracy,
            s.mean_recall,
            s.eliminated.as_deref().unwrap_or("-")
        );
    }
    out.write_table(&with_size_suffix("rfe", with_size), &table)?;
    Ok(())
}

#[derive(Serialize)]
struct AblationSummary {
    summaries: Vec<DeltaSummary>,
    density_test_full: Option<dramanet::stats::WilcoxonResult>,
    density_test_ablated: Option<dramanet::stats::WilcoxonResult>,
    skipped: Vec<dramanet::ablate::Skipped>,
}

fn summary_row(act: Option<usize>, s: &DeltaSummary) -> Vec<Cell> {
    let f = &s.five_number;
    let mut row: Vec<Cell> = Vec::new();
    if let Some(a) = act {
        row.push(a.into());
    }
    row.extend([
        s.genre.as_str().into(),
        s.n.into(),
        s.mean.into(),
        f.min.into(),
        f.q1.into(),
        s.median.into(),
        f.q3.into(),
        f.max.into(),
    ]);
    row
}

pub fn ablate(cfg: &RunConfig, acts: Option<usize>) -> Result<(), Failure> {
    let out = artifacts(cfg);
    let plays = load_corpus(cfg, &out)?;
    let effect = last_act_effect(&plays);
    let mut table = Table::new(["play_id", "genre", "act_removed", "density_full", "density_ablated", "delta"]);
    for r in &effect.records {
        table.push(vec![
            r.play_id.as_str().into(),
            r.genre.as_str().into(),
            r.act_removed.into(),
            r.density_full.into(),
            r.density_ablated.into(),
            r.delta.into(),
        ]);
    }
    out.write_table("ablation", &table)?;
    let summary = AblationSummary {
        summaries: effect.summaries.clone(),
        density_test_full: effect.test_full.clone(),
        density_test_ablated: effect.test_ablated.clone(),
        skipped: effect.skipped.clone(),
    };
    out.write_json("ablation_summary.json", &summary)?;
    for s in &effect.summaries {
        println!("last act removed, {:<8} n = {:<4} mean delta {:+.4}  median {:+.4}", s.genre.as_str(), s.n, s.mean, s.median);
    }
    if let (Some(full), Some(abl)) = (&effect.test_full, &effect.test_ablated) {
        println!("density comedy vs tragedy: p = {:.3e} (full), {:.3e} (without last act)", full.p_value, abl.p_value);
    }
    info!("{} plays skipped", effect.skipped.len());

    if let Some(n) = acts {
        let per_act = per_act_effect(&plays, n)?;
        let mut table = Table::new(["act", "genre", "n", "mean", "min", "q1", "median", "q3", "max"]);
        println!("{} plays with {n} acts", per_act.n_plays);
        for a in &per_act.acts {
            for s in &a.summaries {
                table.push(summary_row(Some(a.act), s));
                println!("  act {} {:<8} mean delta {:+.4}", a.act, s.genre.as_str(), s.mean);
            }
        }
        out.write_table(&format!("ablation_acts_{n}"), &table)?;
        out.write_json(&format!("ablation_acts_{n}_detail.json"), &per_act)?;
    }
    Ok(())
}

pub fn export_graph(cfg: &RunConfig, play_id: &str) -> Result<(), Failure> {
    let out = artifacts(cfg);
    let plays = load_corpus(cfg, &out)?;
    let play = plays
        .iter()
        .find(|p| p.id == play_id)
        .ok_or_else(|| Failure::new(Failure::UNKNOWN_PLAY, format!("no play `{play_id}` in {CORPUS}")))?;
    let g = build_graph(play);
    let mut gexf = Vec::new();
    write_gexf(&g, Some(play), &mut gexf)?;
    let mut edges = Vec::new();
    write_edge_list(&g, &mut edges)?;
    let safe: String = play_id.chars().map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect();
    let a = out.write_bytes(&format!("graphs/{safe}.gexf"), &gexf)?;
    out.write_bytes(&format!("graphs/{safe}.edges.csv"), &edges)?;
    println!("{} nodes, {} edges -> {}", g.n_nodes(), g.n_edges(), a.display());
    Ok(())
}
