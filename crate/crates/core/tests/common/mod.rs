#![allow(dead_code)]

use std::path::PathBuf;

use privrec_core::graph::load_path;
use privrec_core::{Graph, NodeId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// G(n, p) with a fixed seed.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Preferential-attachment graph with a heavy-tailed degree sequence, used where the
/// real vote network is unavailable.
pub fn stand_in_graph(n: usize, per_node: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut endpoints: Vec<usize> = Vec::new();
    let mut edges = Vec::new();
    let core = per_node + 1;
    for u in 0..core {
        for v in u + 1..core {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    for u in core..n {
        let mut chosen = Vec::with_capacity(per_node);
        // a fifth of the attachments are uniform, which leaves a tail of
        // low-degree nodes
        let links = rng.gen_range(1..=per_node);
        while chosen.len() < links {
            let v = if rng.gen_bool(0.2) { rng.gen_range(0..u) } else { *endpoints.choose(&mut rng).unwrap() };
            if !chosen.contains(&v) {
                chosen.push(v);
            }
        }
        for v in chosen {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_permutation_fixing(n: usize, r: NodeId, seed: u64) -> Vec<NodeId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut others: Vec<u32> = (0..n as u32).filter(|&i| i != r.0).collect();
    others.shuffle(&mut rng);
    let mut perm = Vec::with_capacity(n);
    let mut it = others.into_iter();
    for i in 0..n as u32 {
        perm.push(if i == r.0 { r } else { NodeId(it.next().unwrap()) });
    }
    perm
}

/// Location of the public vote network edge list, if present.
pub fn wiki_vote_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("WIKI_VOTE_PATH") {
        let p = PathBuf::from(p);
        return p.exists().then_some(p);
    }
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/wiki-Vote.txt");
    p.exists().then_some(p)
}

pub fn wiki_vote() -> Option<Graph> {
    wiki_vote_path().map(|p| load_path(&p).expect("vote network failed to load"))
}

/// Walk counts by length from `r` to every node, by explicit depth-first enumeration.
pub fn enumerate_walks(g: &Graph, r: NodeId, max_length: usize) -> Vec<Vec<u64>> {
    fn go(g: &Graph, at: NodeId, len: usize, max_length: usize, counts: &mut Vec<Vec<u64>>) {
        counts[len][at.index()] += 1;
        if len == max_length {
            return;
        }
        for &next in g.neighbors(at) {
            go(g, next, len + 1, max_length, counts);
        }
    }
    let mut counts = vec![vec![0u64; g.n()]; max_length + 1];
    go(g, r, 0, max_length, &mut counts);
    counts
}

/// `|N(i) ∩ N(r)|` by scanning every node.
pub fn brute_common_neighbors(g: &Graph, i: NodeId, r: NodeId) -> usize {
    g.nodes().filter(|&w| g.has_edge(i, w) && g.has_edge(r, w)).count()
}
