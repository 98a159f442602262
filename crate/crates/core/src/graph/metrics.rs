use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::CharacterGraph;
use crate::{Error, Result};

/// Network-level measures of a co-occurrence graph.
///
/// Degrees and shortest paths are taken on the unweighted skeleton. Path
/// length and diameter refer to the largest connected component (ties go to
/// the component holding the smallest node id); `avg_path_length` is `None`
/// when that component is a single node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub n_nodes: usize,
    pub avg_clustering: f64,
    pub density: f64,
    pub avg_path_length: Option<f64>,
    pub diameter: usize,
    pub max_betweenness: f64,
    pub avg_deg_max_deg_ratio: f64,
    pub max_deg_over_n_minus_1: f64,
    pub n_components: usize,
}

pub fn compute_metrics(g: &CharacterGraph) -> Result<GraphMetrics> {
    let n = g.n_nodes();
    if n < 2 {
        return Err(Error::DegenerateGraph(n));
    }
    let adj = g.adjacency();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let n_f = n as f64;

    let density = 2.0 * g.n_edges() as f64 / (n_f * (n_f - 1.0));
    let avg_clustering = mean_of_ratios(&local_clustering(&adj));

    let max_deg = *degree.iter().max().unwrap();
    let mean_deg = degree.iter().sum::<usize>() as f64 / n_f;
    let avg_deg_max_deg_ratio = if max_deg == 0 { 0.0 } else { mean_deg / max_deg as f64 };
    let max_deg_over_n_minus_1 = max_deg as f64 / (n_f - 1.0);

    let components = g.components();
    // components are ordered by smallest member, so the first maximum wins ties
    let largest = components
        .iter()
        .fold(&components[0], |best, c| if c.len() > best.len() { c } else { best });
    let (avg_path_length, diameter) = path_stats(&adj, largest);

    let raw = raw_betweenness(&adj);
    let mut comp_size = vec![0usize; n];
    for c in &components {
        for &v in c {
            comp_size[v] = c.len();
        }
    }
    let max_betweenness = raw
        .iter()
        .zip(&comp_size)
        .map(|(&b, &k)| {
            if k < 3 {
                0.0
            } else {
                b / ((k - 1) as f64 * (k - 2) as f64 / 2.0)
            }
        })
        .fold(0.0, f64::max);

    Ok(GraphMetrics {
        n_nodes: n,
        avg_clustering,
        density,
        avg_path_length,
        diameter,
        max_betweenness,
        avg_deg_max_deg_ratio,
        max_deg_over_n_minus_1,
        n_components: components.len(),
    })
}

/// Local clustering as `(linked neighbour pairs, neighbour pairs)`; nodes
/// with fewer than two neighbours give `(0, 1)`.
fn local_clustering(adj: &[Vec<usize>]) -> Vec<(u64, u64)> {
    adj.iter()
        .map(|nbrs| {
            let d = nbrs.len();
            if d < 2 {
                return (0, 1);
            }
            let mut links = 0usize;
            for (k, &u) in nbrs.iter().enumerate() {
                for &w in &nbrs[k + 1..] {
                    if adj[u].binary_search(&w).is_ok() {
                        links += 1;
                    }
                }
            }
            (links as u64, (d * (d - 1) / 2) as u64)
        })
        .collect()
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Mean of `num / den` ratios, rounded once from the exact rational when it
/// fits in 53-bit numerator and denominator (so K4 minus an edge gives the
/// double nearest to 5/6); otherwise a plain floating-point mean.
fn mean_of_ratios(ratios: &[(u64, u64)]) -> f64 {
    const EXACT: u128 = 1 << 53;
    let exact = ratios.iter().try_fold((0u128, 1u128), |(num, den), &(a, b)| {
        let (a, b) = (a as u128, b as u128);
        let g = gcd(den, b);
        let lcm = den.checked_mul(b / g)?;
        let sum = num.checked_mul(lcm / den)?.checked_add(a.checked_mul(lcm / b)?)?;
        let r = gcd(sum, lcm).max(1);
        Some((sum / r, lcm / r))
    });
    if let Some((num, den)) = exact {
        if let Some(den) = den.checked_mul(ratios.len() as u128) {
            let r = gcd(num, den).max(1);
            let (num, den) = (num / r, den / r);
            if num < EXACT && den < EXACT {
                return num as f64 / den as f64;
            }
        }
    }
    ratios.iter().map(|&(a, b)| a as f64 / b as f64).sum::<f64>() / ratios.len() as f64
}

fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for &u in &adj[v] {
            if dist[u].is_none() {
                dist[u] = Some(dv + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

fn path_stats(adj: &[Vec<usize>], component: &[usize]) -> (Option<f64>, usize) {
    let k = component.len();
    if k < 2 {
        return (None, 0);
    }
    let mut total = 0usize;
    let mut diameter = 0usize;
    for &s in component {
        let dist = bfs_distances(adj, s);
        for &t in component {
            if t != s {
                let d = dist[t].expect("same component");
                total += d;
                diameter = diameter.max(d);
            }
        }
    }
    (Some(total as f64 / (k * (k - 1)) as f64), diameter)
}

/// Unnormalized betweenness on an undirected, unweighted graph (Brandes'
/// dependency accumulation). Each unordered pair is counted once.
pub fn raw_betweenness(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut bc = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        order.clear();
        for v in 0..n {
            sigma[v] = 0.0;
            dist[v] = -1;
            delta[v] = 0.0;
            preds[v].clear();
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    // every unordered pair was visited from both endpoints
    bc.iter_mut().for_each(|b| *b /= 2.0);
    bc
}
