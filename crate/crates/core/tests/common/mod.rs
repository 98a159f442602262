#![allow(dead_code)]

use dramanet::corpus::{filter_corpus, parse_tei, CharacterRecord, Genre, Play, Scene, SpeechAct};
use dramanet::features::Tier;
use dramanet::graph::CharacterGraph;
use dramanet::synth::{synth_corpus, SynthConfig};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------- graphs ----------

pub fn graph_from(n: usize, edges: &[(usize, usize)]) -> CharacterGraph {
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let e: Vec<(String, String, u32)> = edges.iter().map(|&(a, b)| (ids[a].clone(), ids[b].clone(), 1)).collect();
    CharacterGraph::from_edges(&ids, &e).unwrap()
}

/// Random spanning tree plus extra edges with probability `p`.
pub fn random_connected(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        let (a, b) = (parent.min(order[k]), parent.max(order[k]));
        edges.push((a, b));
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if !edges.contains(&(a, b)) && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn named_fixtures() -> Vec<(&'static str, usize, Vec<(usize, usize)>)> {
    let k4: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut k4e = k4.clone();
    k4e.retain(|&e| e != (2, 3));
    vec![
        ("K4", 4, k4),
        ("K4-e", 4, k4e),
        ("P3", 3, vec![(0, 1), (1, 2)]),
        ("P4", 4, vec![(0, 1), (1, 2), (2, 3)]),
        ("star-5", 5, vec![(0, 1), (0, 2), (0, 3), (0, 4)]),
    ]
}

#[derive(Debug, Clone)]
pub struct OracleMetrics {
    pub avg_clustering: f64,
    pub density: f64,
    pub avg_path_length: Option<f64>,
    pub diameter: usize,
    pub max_betweenness: f64,
    pub avg_deg_max_deg_ratio: f64,
    pub max_deg_over_n_minus_1: f64,
    pub n_components: usize,
    /// Unnormalized betweenness per node.
    pub raw_betweenness: Vec<f64>,
    /// Intermediate-node occurrences summed over all shortest paths,
    /// each path weighted by 1 / (number of shortest paths for its pair).
    pub weighted_occurrences: f64,
}

fn all_shortest_paths(adj: &[Vec<bool>], s: usize, t: usize, len: usize) -> Vec<Vec<usize>> {
    // depth-first enumeration of simple paths of exactly `len` edges
    let mut out = Vec::new();
    let mut path = vec![s];
    fn go(adj: &[Vec<bool>], t: usize, len: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if path.len() - 1 == len {
            if v == t {
                out.push(path.clone());
            }
            return;
        }
        for u in 0..adj.len() {
            if adj[v][u] && !path.contains(&u) {
                path.push(u);
                go(adj, t, len, path, out);
                path.pop();
            }
        }
    }
    go(adj, t, len, &mut path, &mut out);
    out
}

/// Direct-formula metrics on an adjacency matrix, with Floyd–Warshall
/// distances and explicit enumeration of every shortest path.
pub fn brute_metrics(g: &CharacterGraph) -> OracleMetrics {
    let n = g.n_nodes();
    let mut adj = vec![vec![false; n]; n];
    for (a, b, _) in g.edges() {
        let (i, j) = (g.index_of(a).unwrap(), g.index_of(b).unwrap());
        adj[i][j] = true;
        adj[j][i] = true;
    }
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let m = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| adj[i][j]).count();
    let deg: Vec<usize> = (0..n).map(|i| adj[i].iter().filter(|&&x| x).count()).collect();

    let clustering: f64 = (0..n)
        .map(|v| {
            let nb: Vec<usize> = (0..n).filter(|&u| adj[v][u]).collect();
            if nb.len() < 2 {
                return 0.0;
            }
            let mut linked = 0;
            let mut pairs = 0;
            for a in 0..nb.len() {
                for b in a + 1..nb.len() {
                    pairs += 1;
                    if adj[nb[a]][nb[b]] {
                        linked += 1;
                    }
                }
            }
            linked as f64 / pairs as f64
        })
        .sum::<f64>()
        / n as f64;

    // components by reachability; label = smallest member
    let comp_of: Vec<usize> = (0..n).map(|v| (0..n).find(|&u| d[v][u] < INF).unwrap()).collect();
    let mut labels: Vec<usize> = comp_of.clone();
    labels.sort_unstable();
    labels.dedup();
    let size = |c: usize| comp_of.iter().filter(|&&x| x == c).count();
    let mut largest = labels[0];
    for &c in &labels {
        if size(c) > size(largest) {
            largest = c;
        }
    }
    let members: Vec<usize> = (0..n).filter(|&v| comp_of[v] == largest).collect();
    let (apl, diameter) = if members.len() < 2 {
        (None, 0)
    } else {
        let mut total = 0;
        let mut count = 0;
        let mut diam = 0;
        for &a in &members {
            for &b in &members {
                if a != b {
                    total += d[a][b];
                    count += 1;
                    diam = diam.max(d[a][b]);
                }
            }
        }
        (Some(total as f64 / count as f64), diam)
    };

    let mut raw = vec![0.0; n];
    let mut occurrences = 0.0;
    for s in 0..n {
        for t in s + 1..n {
            if d[s][t] >= INF {
                continue;
            }
            let paths = all_shortest_paths(&adj, s, t, d[s][t]);
            let share = 1.0 / paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    raw[v] += share;
                    occurrences += share;
                }
            }
        }
    }
    let max_betweenness = (0..n)
        .map(|v| {
            let k = size(comp_of[v]);
            if k < 3 {
                0.0
            } else {
                raw[v] / ((k - 1) * (k - 2)) as f64 * 2.0
            }
        })
        .fold(0.0, f64::max);
    let max_deg = *deg.iter().max().unwrap();
    let mean_deg = deg.iter().sum::<usize>() as f64 / n as f64;
    OracleMetrics {
        avg_clustering: clustering,
        density: m as f64 / (n * (n - 1) / 2) as f64,
        avg_path_length: apl,
        diameter,
        max_betweenness,
        avg_deg_max_deg_ratio: if max_deg == 0 { 0.0 } else { mean_deg / max_deg as f64 },
        max_deg_over_n_minus_1: max_deg as f64 / (n - 1) as f64,
        n_components: labels.len(),
        raw_betweenness: raw,
        weighted_occurrences: occurrences,
    }
}

/// Every metric of `compute_metrics` against the oracle; returns the first mismatch.
pub fn compare_metrics(g: &CharacterGraph, tol: f64) -> Result<(), String> {
    let m = dramanet::graph::compute_metrics(g).map_err(|e| e.to_string())?;
    let o = brute_metrics(g);
    let close = |name: &str, a: f64, b: f64| {
        if (a - b).abs() <= tol {
            Ok(())
        } else {
            Err(format!("{name}: {a} vs oracle {b}"))
        }
    };
    close("avg_clustering", m.avg_clustering, o.avg_clustering)?;
    close("density", m.density, o.density)?;
    match (m.avg_path_length, o.avg_path_length) {
        (Some(a), Some(b)) => close("avg_path_length", a, b)?,
        (None, None) => {}
        (a, b) => return Err(format!("avg_path_length: {a:?} vs oracle {b:?}")),
    }
    if m.diameter != o.diameter {
        return Err(format!("diameter: {} vs oracle {}", m.diameter, o.diameter));
    }
    if m.n_components != o.n_components {
        return Err(format!("n_components: {} vs oracle {}", m.n_components, o.n_components));
    }
    close("max_betweenness", m.max_betweenness, o.max_betweenness)?;
    close("avg_deg_max_deg_ratio", m.avg_deg_max_deg_ratio, o.avg_deg_max_deg_ratio)?;
    close("max_deg_over_n_minus_1", m.max_deg_over_n_minus_1, o.max_deg_over_n_minus_1)?;
    let raw = dramanet::graph::raw_betweenness(&g.adjacency());
    for (v, (a, b)) in raw.iter().zip(&o.raw_betweenness).enumerate() {
        close(&format!("raw betweenness of node {v}"), *a, *b)?;
    }
    close("betweenness sum", raw.iter().sum(), o.weighted_occurrences)?;
    Ok(())
}

// ---------- 1-D k-means ----------

fn cluster_sse(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum()
}

/// SSE of a partition given as three (possibly empty) sorted clusters.
pub fn partition_sse(clusters: &[Vec<f64>; 3]) -> f64 {
    clusters.iter().map(|c| cluster_sse(c)).sum()
}

/// Members of each tier as `[low, medium, high]`, each sorted ascending.
pub fn tier_partition(values: &[f64], tiers: &[Tier]) -> [Vec<f64>; 3] {
    let pick = |t: Tier| {
        let mut xs: Vec<f64> = values.iter().zip(tiers).filter(|(_, &x)| x == t).map(|(v, _)| *v).collect();
        xs.sort_by(f64::total_cmp);
        xs
    };
    [pick(Tier::Low), pick(Tier::Medium), pick(Tier::High)]
}

/// Minimum SSE over all ways of cutting the sorted values at two points.
pub fn exhaustive_kmeans_sse(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut best = f64::INFINITY;
    for i in 1..n {
        for j in (i + 1)..n {
            let sse = partition_sse(&[sorted[..i].to_vec(), sorted[i..j].to_vec(), sorted[j..].to_vec()]);
            best = best.min(sse);
        }
    }
    best
}

// ---------- rank-sum ----------

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Two-sided exact p-value by enumerating every assignment of ranks to the
/// first group (tie-free input).
pub fn enumerated_ranksum_p(a: &[f64], b: &[f64]) -> f64 {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    let rank = |x: f64| all.iter().position(|&y| y == x).unwrap() + 1;
    let n1 = a.len();
    let observed: usize = a.iter().map(|&x| rank(x)).sum();
    let sums: Vec<usize> = combinations(all.len(), n1).iter().map(|c| c.iter().map(|i| i + 1).sum()).collect();
    let total = sums.len() as f64;
    let lower = sums.iter().filter(|&&s| s <= observed).count() as f64 / total;
    let upper = sums.iter().filter(|&&s| s >= observed).count() as f64 / total;
    (2.0 * lower.min(upper)).min(1.0)
}

/// `n` distinct values drawn uniformly from [0, 1).
pub fn distinct_sample(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(n);
    while out.len() < n {
        let x: f64 = rng.gen();
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

// ---------- eigenvalues ----------

/// Eigenvalues of a symmetric positive semi-definite matrix by power
/// iteration with Hotelling deflation, largest first.
pub fn power_iteration_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7 + k * 3) % 5) as f64 * 0.1).collect();
        let mut lambda = 0.0;
        for _ in 0..200_000 {
            let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] * v[j]).sum()).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                lambda = 0.0;
                break;
            }
            let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
            let mv: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] * next[j]).sum()).collect();
            let rq: f64 = next.iter().zip(&mv).map(|(a, b)| a * b).sum();
            let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            let settled = (rq - lambda).abs() <= 1e-15 * rq.abs().max(1.0) && diff < 1e-12;
            lambda = rq;
            if settled {
                break;
            }
        }
        out.push(lambda);
        for i in 0..n {
            for j in 0..n {
                m[i][j] -= lambda * v[i] * v[j];
            }
        }
    }
    out
}

// ---------- plays ----------

pub fn play_from_scenes(id: &str, genre: Genre, scenes: &[(usize, &[&str])]) -> Play {
    let mut ids: Vec<&str> = scenes.iter().flat_map(|(_, c)| c.iter().copied()).collect();
    ids.sort_unstable();
    ids.dedup();
    Play {
        id: id.into(),
        title: id.into(),
        author: String::new(),
        raw_genre: genre.as_str().into(),
        genre,
        characters: ids
            .iter()
            .map(|c| CharacterRecord { id: c.to_string(), name: c.to_string(), is_group: false })
            .collect(),
        scenes: scenes
            .iter()
            .enumerate()
            .map(|(k, (act, cast))| Scene {
                act_index: *act,
                scene_index: k + 1,
                present_ids: cast.iter().map(|s| s.to_string()).collect(),
                speeches: cast
                    .iter()
                    .enumerate()
                    .map(|(j, s)| SpeechAct { speaker_id: s.to_string(), word_count: 3 + j })
                    .collect(),
            })
            .collect(),
        act_count: scenes.iter().map(|(a, _)| *a).max().unwrap_or(1),
    }
}

pub fn synthetic_plays(cfg: &SynthConfig) -> Vec<Play> {
    let plays = synth_corpus(cfg)
        .iter()
        .map(|(_, xml)| parse_tei(xml.as_bytes()).unwrap().play)
        .collect();
    filter_corpus(plays, 5, 2)
}

// ---------- SVM fixtures ----------

/// Two Gaussian-ish blobs separated along a random direction by a clear gap.
pub fn separable_blobs(rng: &mut impl Rng, n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dir: Vec<f64> = dir.iter().map(|x| x / norm).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let positive = i % 2 == 0;
        let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let along: f64 = x.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let shift = if positive { 1.5 - along + rng.gen_range(0.0..1.0) } else { -1.5 - along - rng.gen_range(0.0..1.0) };
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi += shift * di;
        }
        rows.push(x);
        labels.push(positive);
    }
    (rows, labels)
}

pub fn xor_fixture() -> (Vec<Vec<f64>>, Vec<bool>) {
    (
        vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![true, true, false, false],
    )
}

pub fn training_accuracy(model: &dramanet::learn::LinearModel, rows: &[Vec<f64>], labels: &[bool]) -> f64 {
    rows.iter().zip(labels).filter(|(r, &l)| model.predict(r) == l).count() as f64 / rows.len() as f64
}

/// Largest geometric margin of any separator, searched over unit normal
/// angles on a fine grid with a golden-section refinement around the best.
pub fn brute_force_margin_2d(rows: &[Vec<f64>], labels: &[bool]) -> f64 {
    let margin_at = |theta: f64| {
        let (c, s) = (theta.cos(), theta.sin());
        let proj: Vec<f64> = rows.iter().map(|r| c * r[0] + s * r[1]).collect();
        let min_pos = proj.iter().zip(labels).filter(|(_, &l)| l).map(|(p, _)| *p).fold(f64::INFINITY, f64::min);
        let max_neg = proj.iter().zip(labels).filter(|(_, &l)| !l).map(|(p, _)| *p).fold(f64::NEG_INFINITY, f64::max);
        (min_pos - max_neg) / 2.0
    };
    let steps = 100_000;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..steps {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
        let m = margin_at(theta);
        if m > best.1 {
            best = (theta, m);
        }
    }
    let h = 2.0 * std::f64::consts::PI / steps as f64;
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if margin_at(a) > margin_at(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    margin_at((lo + hi) / 2.0).max(best.1)
}
