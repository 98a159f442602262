//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Corpus-dependent checks read a directory of TEI files from
//! `DRAMANET_GERDRACOR_DIR` (optionally with a `play_id,genre` override file
//! in `DRAMANET_GERDRACOR_MANIFEST`) and `DRAMANET_SHAKESPEARE_DIR`; they are
//! reported as SKIP when the variables are unset.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use dramanet::ablate::last_act_effect;
use dramanet::corpus::{filter_corpus, load_corpus_dir, Genre, GenreManifest, Play};
use dramanet::features::{all_measures, build_dataset, extract_features, kmeans3_1d, FeatureVector, RETAINED_FEATURES};
use dramanet::graph::compute_metrics;
use dramanet::learn::{loo_evaluate, train_svm};
use dramanet::stats::{
    correlation_screen, covariance, genre_tests, jacobi_eigen, measure_columns, pca, pearson_matrix,
    wilcoxon_ranksum_with, Method, KEEP_PRIORITY,
};
use dramanet::synth::SynthConfig;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    match (out, limit) {
        (Outcome::Pass(d), Some(l)) if elapsed > l => {
            Outcome::Fail(format!("{d}; took {:.2}s, limit {:.0}s", elapsed.as_secs_f64(), l.as_secs_f64()))
        }
        (Outcome::Pass(d), _) => Outcome::Pass(format!("{d}; {:.2}s", elapsed.as_secs_f64())),
        (other, _) => other,
    }
}

fn graph_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut checked = 0;
    for (name, n, edges) in named_fixtures() {
        if let Err(e) = compare_metrics(&graph_from(n, &edges), 1e-9) {
            return Outcome::Fail(format!("{name}: {e}"));
        }
        checked += 1;
    }
    for trial in 0..500 {
        let n = 2 + trial % 7;
        let p = rng.gen_range(0.0..0.8);
        let edges = random_connected(&mut rng, n, p);
        if let Err(e) = compare_metrics(&graph_from(n, &edges), 1e-9) {
            return Outcome::Fail(format!("n={n} {edges:?}: {e}"));
        }
        checked += 1;
    }
    let (_, n, k4e) = named_fixtures().into_iter().find(|f| f.0 == "K4-e").unwrap();
    let c = compute_metrics(&graph_from(n, &k4e)).unwrap().avg_clustering;
    verdict(c == 5.0 / 6.0, format!("{checked} graphs within 1e-9, K4-e clustering = {c:?}"))
}

fn kmeans_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    for k in 0..200 {
        let len = rng.gen_range(3..=12);
        let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let dp = partition_sse(&tier_partition(&v, &kmeans3_1d(&v).unwrap()));
        let best = exhaustive_kmeans_sse(&v);
        if dp != best {
            return Outcome::Fail(format!("vector {k}: DP SSE {dp} vs exhaustive {best}"));
        }
    }
    Outcome::Pass("200 vectors, DP SSE equals exhaustive minimum exactly".into())
}

fn wilcoxon() -> Outcome {
    let p = wilcoxon_ranksum_with(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0], Method::Exact).unwrap().p_value;
    if (p - 0.1).abs() > 1e-12 {
        return Outcome::Fail(format!("exact p = {p}, expected 0.1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let all = distinct_sample(&mut rng, 18);
        let (a, b) = all.split_at(8);
        let exact = wilcoxon_ranksum_with(a, b, Method::Exact).unwrap().p_value;
        let approx = wilcoxon_ranksum_with(a, b, Method::Normal).unwrap().p_value;
        worst = worst.max((exact - approx).abs());
    }
    verdict(worst <= 0.01, format!("exact p = {p}; max |exact - normal| over 100 (8,10) pairs = {worst:.5} (tol 0.01)"))
}

fn pca_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let (mut ortho, mut var, mut eig): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..10 {
        let mix: Vec<Vec<f64>> = (0..13).map(|_| (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let x: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                let base: Vec<f64> = (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (0..13).map(|j| (0..13).map(|k| base[k] * mix[k][j]).sum()).collect()
            })
            .collect();
        let r = pca(&x).unwrap();
        for a in 0..13 {
            for b in 0..13 {
                let dot: f64 = (0..13).map(|f| r.loadings[f][a] * r.loadings[f][b]).sum();
                ortho = ortho.max((dot - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        let (_, cov) = covariance(&x);
        let trace: f64 = (0..13).map(|i| cov[i][i]).sum();
        var = var.max((r.explained_variance.iter().sum::<f64>() - trace).abs());
        let mut jac = jacobi_eigen(&cov).0;
        jac.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in jac.iter().zip(power_iteration_eigenvalues(&cov)) {
            eig = eig.max((a - b).abs());
        }
    }
    let line: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64 * 0.5, i as f64 * 0.5]).collect();
    let l = pca(&line).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let line_err = (l.loadings[0][0] - h).abs().max((l.loadings[1][0] - h).abs());
    verdict(
        ortho <= 1e-9 && var <= 1e-9 && eig <= 1e-6 && line_err <= 1e-9,
        format!("orthonormality {ortho:.1e}, variance {var:.1e}, eigenvalues vs power iteration {eig:.1e}, y=x loading {line_err:.1e}"),
    )
}

fn svm_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    for dim in [2, 4, 13] {
        let (rows, labels) = separable_blobs(&mut rng, 40, dim);
        let acc = training_accuracy(&train_svm(&rows, &labels, 1.0).unwrap(), &rows, &labels);
        if acc != 1.0 {
            return Outcome::Fail(format!("separable fixture in {dim}-D reached {acc}"));
        }
    }
    let (rows, labels) = xor_fixture();
    let xor = training_accuracy(&train_svm(&rows, &labels, 1.0).unwrap(), &rows, &labels);
    if xor > 0.75 {
        return Outcome::Fail(format!("XOR accuracy {xor}"));
    }
    for k in 0..50 {
        let n = rng.gen_range(10..40);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let mut labels: Vec<bool> = rows.iter().map(|r| r[0] - r[2] + rng.gen_range(-1.0..1.0) > 0.0).collect();
        labels[0] = true;
        labels[1] = false;
        let model = train_svm(&rows, &labels, 1.0).unwrap();
        let c: f64 = rng.gen_range(0.01..100.0);
        let scaled_model = model.scaled(c);
        let scaled_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * c).collect()).collect();
        let retrained = train_svm(&scaled_rows, &labels, 1.0 / (c * c)).unwrap();
        for (i, r) in rows.iter().enumerate() {
            let base = model.predict(r);
            if scaled_model.predict(r) != base {
                return Outcome::Fail(format!("fixture {k}: rescaled model flips row {i}"));
            }
            if model.decision(r).abs() > 1e-4 && retrained.predict(&scaled_rows[i]) != base {
                return Outcome::Fail(format!("fixture {k}: model on rescaled inputs flips row {i} (c = {c})"));
            }
        }
    }
    let (rows, labels) = separable_blobs(&mut rng, 30, 5);
    let a = serde_json::to_vec(&train_svm(&rows, &labels, 1.0).unwrap()).unwrap();
    let b = serde_json::to_vec(&train_svm(&rows, &labels, 1.0).unwrap()).unwrap();
    verdict(a == b, format!("separable 1.0, XOR {xor}, 50 rescaled fixtures agree, repeat runs identical: {}", a == b))
}

fn end_to_end() -> Outcome {
    let plays = synthetic_plays(&SynthConfig::default());
    let ds = build_dataset(&plays).unwrap();
    let report = loo_evaluate(&ds, 1.0).unwrap();
    let (rc, rt) = (report.comedy.recall, report.tragedy.recall);
    let labels = ds.labels();
    let comedies = labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64;
    let prior = comedies.max(1.0 - comedies);
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let mut total = 0.0;
    for _ in 0..20 {
        let mut shuffled = ds.clone();
        shuffled.genres.shuffle(&mut rng);
        total += loo_evaluate(&shuffled, 1.0).unwrap().accuracy;
    }
    let mean = total / 20.0;
    verdict(
        rc >= 0.9 && rt >= 0.9 && (mean - prior).abs() <= 0.1,
        format!(
            "{} plays: comedy recall {rc:.3}, tragedy recall {rt:.3} (min 0.9); shuffled mean accuracy {mean:.3} vs prior {prior:.3} (tol 0.1)",
            plays.len()
        ),
    )
}

fn ablation_direction() -> Outcome {
    let comedies = synthetic_plays(&SynthConfig { n_comedies: 20, n_tragedies: 0, acts: 5, seed: 1007 });
    let tragedies = synthetic_plays(&SynthConfig { n_comedies: 0, n_tragedies: 20, acts: 5, seed: 1008 });
    let mean = |plays: &[Play], g: Genre| {
        last_act_effect(plays).summaries.iter().find(|s| s.genre == g).map(|s| s.mean).unwrap_or(f64::NAN)
    };
    let (c, t) = (mean(&comedies, Genre::Comedy), mean(&tragedies, Genre::Tragedy));
    verdict(c > 0.0 && t < 0.0, format!("wedding-finale comedies mean delta {c:+.4}, graveyard-finale tragedies {t:+.4}"))
}

fn load(dir: &str, manifest: Option<String>, history_as_tragedy: bool) -> Result<Vec<Play>, String> {
    let mut loaded = load_corpus_dir(Path::new(dir), history_as_tragedy).map_err(|e| e.to_string())?;
    if let Some(path) = manifest {
        let file = std::fs::File::open(&path).map_err(|e| format!("{path}: {e}"))?;
        let m = GenreManifest::from_reader(file).map_err(|e| e.to_string())?;
        for p in &mut loaded.plays {
            m.apply(p, history_as_tragedy);
        }
    }
    Ok(filter_corpus(loaded.plays, 5, 2))
}

fn gerdracor() -> Outcome {
    let Ok(dir) = std::env::var("DRAMANET_GERDRACOR_DIR") else {
        return Outcome::Skip("DRAMANET_GERDRACOR_DIR not set".into());
    };
    let plays = match load(&dir, std::env::var("DRAMANET_GERDRACOR_MANIFEST").ok(), false) {
        Ok(p) => p,
        Err(e) => return Outcome::Fail(e),
    };
    let mut problems = Vec::new();
    let n = plays.len() as f64;
    if (n - 253.0).abs() > 25.3 {
        problems.push(format!("{n} plays retained (253 ± 10%)"));
    }
    let features: Vec<FeatureVector> = plays.iter().filter_map(|p| extract_features(p).ok()).collect();
    let screen = measure_columns(&features, &all_measures())
        .and_then(|cols| pearson_matrix(&cols))
        .and_then(|m| correlation_screen(&m, 0.9, &KEEP_PRIORITY, Some("n_characters")));
    match screen {
        Ok(s) if s.kept.len() == 13 => {}
        Ok(s) => problems.push(format!("screening kept {} features: {:?}", s.kept.len(), s.kept)),
        Err(e) => problems.push(format!("screening failed: {e}")),
    }
    let ds = match build_dataset(&plays) {
        Ok(ds) => ds,
        Err(e) => return Outcome::Fail(format!("dataset: {e}")),
    };
    let r = loo_evaluate(&ds, 1.0).unwrap();
    if (r.comedy.recall - 0.82).abs() > 0.08 || (r.tragedy.recall - 0.65).abs() > 0.08 {
        problems.push(format!("recall comedy {:.3} (0.82 ± 0.08), tragedy {:.3} (0.65 ± 0.08)", r.comedy.recall, r.tragedy.recall));
    }
    let tests = genre_tests(&ds).unwrap();
    for t in &tests {
        let expect_significant = t.feature != "medium_wdeg";
        if t.significant(0.05) != expect_significant {
            problems.push(format!("{} p = {:.4}", t.feature, t.result.p_value));
        }
    }
    debug_assert_eq!(tests.len(), RETAINED_FEATURES.len());
    verdict(
        problems.is_empty(),
        format!(
            "{n} plays, comedy recall {:.3}, tragedy recall {:.3}{}",
            r.comedy.recall,
            r.tragedy.recall,
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn shakespeare() -> Outcome {
    let Ok(dir) = std::env::var("DRAMANET_SHAKESPEARE_DIR") else {
        return Outcome::Skip("DRAMANET_SHAKESPEARE_DIR not set".into());
    };
    let plays = match load(&dir, None, true) {
        Ok(p) => p,
        Err(e) => return Outcome::Fail(e),
    };
    let effect = last_act_effect(&plays);
    let (Some(full), Some(ablated)) = (effect.test_full, effect.test_ablated) else {
        return Outcome::Fail("density tests could not be run".into());
    };
    // within one order of magnitude of 0.0003702 and 0.00002745
    let in_decade = |p: f64, target: f64| (p / target).log10().abs() <= 1.0;
    let ok = full.p_value < 1e-3
        && ablated.p_value < 1e-3
        && in_decade(full.p_value, 3.702e-4)
        && in_decade(ablated.p_value, 2.745e-5);
    verdict(ok, format!("{} plays: density p full {:.3e}, without last acts {:.3e}", plays.len(), full.p_value, ablated.p_value))
}

fn main() {
    let criteria: Vec<(&str, Option<Duration>, fn() -> Outcome)> = vec![
        ("graph metrics vs brute-force oracle", Some(Duration::from_secs(10)), graph_oracle),
        ("1-D k-means optimality", Some(Duration::from_secs(5)), kmeans_optimality),
        ("Wilcoxon exact and approximate p", None, wilcoxon),
        ("PCA validity", None, pca_validity),
        ("SVM sanity", None, svm_sanity),
        ("end-to-end synthetic pipeline", Some(Duration::from_secs(60)), end_to_end),
        ("act ablation direction", None, ablation_direction),
        ("GerDraCor reproduction", None, gerdracor),
        ("Shakespeare last-act density tests", None, shakespeare),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        match timed(limit, check) {
            Outcome::Pass(d) => println!("PASS  {name}: {d}"),
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
