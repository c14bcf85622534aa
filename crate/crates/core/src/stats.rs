// SPDX-License-Identifier: Apache-2.0

//! Graph statistics: node/edge counts, average degree, average shortest
//! path. All statistics use undirected simple-graph semantics: parallel
//! edges are collapsed and self-loops dropped before counting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::CircuitGraph;
use crate::homo::HomoGraph;

/// Exact all-sources BFS is used up to this size; larger graphs are sampled.
pub const EXACT_LIMIT: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 1024;

/// Undirected simple graph (deduplicated adjacency, no self-loops).
#[derive(Debug, Clone)]
pub struct SimpleGraph {
    pub num_nodes: usize,
    pub adj: Vec<Vec<u32>>,
}

impl SimpleGraph {
    pub fn from_edges(num_nodes: usize, edges: impl Iterator<Item = (usize, usize)>) -> SimpleGraph {
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); num_nodes];
        for (a, b) in edges {
            if a == b {
                continue;
            }
            adj[a].push(b as u32);
            adj[b].push(a as u32);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        SimpleGraph { num_nodes, adj }
    }

    pub fn from_circuit(g: &CircuitGraph) -> SimpleGraph {
        // same dense renumbering as the homograph conversion
        let mut offsets = std::collections::HashMap::new();
        let mut total = 0usize;
        for t in g.nodes.values() {
            offsets.insert(t.kind.as_str(), total);
            total += t.row_count;
        }
        let edges = g.edges.values().flat_map(|t| {
            let so = offsets[t.src_kind.as_str()];
            let do_ = offsets[t.dst_kind.as_str()];
            t.src
                .iter()
                .zip(&t.dst)
                .map(move |(s, d)| (so + *s as usize, do_ + *d as usize))
                .collect::<Vec<_>>()
        });
        SimpleGraph::from_edges(total, edges)
    }

    pub fn from_homo(h: &HomoGraph) -> SimpleGraph {
        SimpleGraph::from_edges(
            h.num_nodes,
            h.src
                .iter()
                .zip(&h.dst)
                .map(|(s, d)| (*s as usize, *d as usize)),
        )
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub avg_degree: f64,
}

pub fn degree_stats(g: &SimpleGraph) -> DegreeStats {
    let e = g.num_edges();
    DegreeStats {
        num_nodes: g.num_nodes,
        num_edges: e,
        avg_degree: if g.num_nodes == 0 {
            0.0
        } else {
            2.0 * e as f64 / g.num_nodes as f64
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// All-sources BFS.
    Exact,
    /// BFS from `k` distinct sources drawn without replacement under `seed`.
    Sampled { k: usize, seed: u64 },
    /// Exact when |V| <= EXACT_LIMIT, else Sampled{DEFAULT_SAMPLES, seed}.
    Auto { seed: u64 },
}

fn bfs_sum(g: &SimpleGraph, source: usize) -> (u64, u64) {
    // (sum of distances, reachable pair count) over targets != source
    let mut dist = vec![u32::MAX; g.num_nodes];
    let mut queue = std::collections::VecDeque::new();
    dist[source] = 0;
    queue.push_back(source as u32);
    let mut sum = 0u64;
    let mut pairs = 0u64;
    while let Some(u) = queue.pop_front() {
        for &v in &g.adj[u as usize] {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                sum += dist[v as usize] as u64;
                pairs += 1;
                queue.push_back(v);
            }
        }
    }
    (sum, pairs)
}

/// Mean unweighted shortest-path length over reachable ordered pairs.
/// Unreachable pairs are excluded; a graph with no reachable pairs scores 0.
pub fn avg_shortest_path(g: &SimpleGraph, mode: PathMode) -> f64 {
    let sources: Vec<usize> = match mode {
        PathMode::Exact => (0..g.num_nodes).collect(),
        PathMode::Auto { seed } if g.num_nodes <= EXACT_LIMIT => {
            let _ = seed;
            (0..g.num_nodes).collect()
        }
        PathMode::Auto { seed } => sample_sources(g.num_nodes, DEFAULT_SAMPLES, seed),
        PathMode::Sampled { k, seed } => sample_sources(g.num_nodes, k, seed),
    };
    let mut sum = 0u64;
    let mut pairs = 0u64;
    for s in sources {
        let (d, p) = bfs_sum(g, s);
        sum += d;
        pairs += p;
    }
    if pairs == 0 {
        0.0
    } else {
        sum as f64 / pairs as f64
    }
}

fn sample_sources(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    ids.truncate(k.min(n));
    // stable iteration order for determinism of the accumulation
    ids.sort_unstable();
    ids
}

/// Flat key-value report for the CLI and the bundle manifest.
pub fn stats_report(g: &SimpleGraph, mode: PathMode) -> Vec<(String, String)> {
    let d = degree_stats(g);
    let asp = avg_shortest_path(g, mode);
    let mode_str = match mode {
        PathMode::Exact => "exact".to_string(),
        PathMode::Sampled { k, seed } => format!("sampled(k={k},seed={seed})"),
        PathMode::Auto { seed } => {
            if g.num_nodes <= EXACT_LIMIT {
                "exact".to_string()
            } else {
                format!("sampled(k={DEFAULT_SAMPLES},seed={seed})")
            }
        }
    };
    vec![
        ("num_nodes".into(), d.num_nodes.to_string()),
        ("num_edges".into(), d.num_edges.to_string()),
        ("avg_degree".into(), format!("{:.6}", d.avg_degree)),
        ("avg_shortest_path".into(), format!("{asp:.6}")),
        ("path_mode".into(), mode_str),
        (
            "conventions".into(),
            "undirected,parallel_collapsed,unreachable_excluded".into(),
        ),
    ]
}
