//! Weighted character co-occurrence networks.

mod export;
mod metrics;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Play, Scene};
use crate::{Error, Result};

pub use export::{write_edge_list, write_gexf};
pub use metrics::{compute_metrics, raw_betweenness, GraphMetrics};

/// Undirected co-occurrence network. Nodes are kept sorted by id; an edge
/// `(i, j)` with `i < j` indexes into `node_ids` and carries the number of
/// scenes both characters share.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterGraph {
    node_ids: Vec<String>,
    edges: BTreeMap<(usize, usize), u32>,
}

impl CharacterGraph {
    /// Builds a graph from explicit nodes and weighted edges. Duplicate edges
    /// accumulate their weights.
    pub fn from_edges<S: AsRef<str>>(nodes: &[S], edges: &[(S, S, u32)]) -> Result<Self> {
        let node_ids: Vec<String> = nodes
            .iter()
            .map(|s| s.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if node_ids.len() != nodes.len() {
            return Err(Error::InvalidArgument("duplicate node id".into()));
        }
        let mut g = Self { node_ids, edges: BTreeMap::new() };
        for (a, b, w) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b {
                return Err(Error::InvalidArgument(format!("self-edge on `{a}`")));
            }
            if *w == 0 {
                return Err(Error::InvalidArgument(format!("zero weight on `{a}`-`{b}`")));
            }
            let i = g.index_of(a).ok_or_else(|| Error::InvalidArgument(format!("unknown node `{a}`")))?;
            let j = g.index_of(b).ok_or_else(|| Error::InvalidArgument(format!("unknown node `{b}`")))?;
            *g.edges.entry((i.min(j), i.max(j))).or_default() += w;
        }
        Ok(g)
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn n_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_ids.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u32> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    /// Edges as `(source, target, weight)` with `source < target`.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u32)> + '_ {
        self.edges
            .iter()
            .map(|(&(i, j), &w)| (self.node_ids[i].as_str(), self.node_ids[j].as_str(), w))
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(|&w| u64::from(w)).sum()
    }

    /// Unweighted adjacency lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_ids.len()];
        for &(i, j) in self.edges.keys() {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Connected components as sorted index lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; adj.len()];
        let mut out = Vec::new();
        for start in 0..adj.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for &u in &adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Co-occurrence graph of a play: every pair of characters sharing a scene
/// gains one unit of edge weight per shared scene.
pub fn build_graph(play: &Play) -> CharacterGraph {
    build_from_scenes(play.scenes.iter())
}

/// Co-occurrence graph over an arbitrary subset of scenes.
pub fn build_from_scenes<'a, I>(scenes: I) -> CharacterGraph
where
    I: IntoIterator<Item = &'a Scene> + Clone,
{
    let node_ids: Vec<String> = scenes
        .clone()
        .into_iter()
        .flat_map(|s| s.present_ids.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut g = CharacterGraph { node_ids, edges: BTreeMap::new() };
    for scene in scenes {
        let idx: Vec<usize> = scene
            .present_ids
            .iter()
            .map(|id| g.index_of(id).expect("node collected above"))
            .collect();
        // present_ids is a sorted set, so idx is ascending
        for (k, &i) in idx.iter().enumerate() {
            for &j in &idx[k + 1..] {
                *g.edges.entry((i, j)).or_default() += 1;
            }
        }
    }
    g
}

/// Sum of incident edge weights for every node (isolated nodes map to 0).
pub fn weighted_degrees(g: &CharacterGraph) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = g.node_ids.iter().map(|id| (id.clone(), 0.0)).collect();
    for (a, b, w) in g.edges() {
        *out.get_mut(a).unwrap() += f64::from(w);
        *out.get_mut(b).unwrap() += f64::from(w);
    }
    out
}
