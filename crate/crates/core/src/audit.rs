//! Exhaustive privacy audits on small labeled graphs.
//!
//! Every labeled graph on `2..=max_nodes` nodes is enumerated as an edge bitmask. For
//! each target `r` and each edge not incident on `r`, the recommendation distributions
//! on the graph with and without that edge are compared; the candidate set is the same
//! on both sides, so the log-ratio is taken candidate by candidate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeFlip, Graph, NodeId};
use crate::mechanisms::{
    argmax_distribution, exponential_distribution, laplace_selection_probabilities, linear_smoothing, smoothing_privacy,
    MechanismParams, RecommendationDistribution,
};
use crate::utility::{utility_vector, UtilityFunctionSpec, UtilityVector};

pub const MAX_AUDIT_NODES: usize = 7;
pub const MAX_LAPLACE_AUDIT_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditMechanism {
    Exponential,
    Laplace,
    /// Smoothing with weight `x` applied to the non-private argmax recommender.
    Smoothing { x: f64 },
}

impl AuditMechanism {
    fn distribution(&self, uv: &UtilityVector, params: &MechanismParams) -> Result<RecommendationDistribution> {
        match *self {
            AuditMechanism::Exponential => exponential_distribution(uv, params),
            AuditMechanism::Laplace => laplace_selection_probabilities(uv, params),
            AuditMechanism::Smoothing { x } => linear_smoothing(&argmax_distribution(uv)?, x),
        }
    }

    /// Privacy level the mechanism claims for a target with `n` candidates.
    pub fn guarantee(&self, epsilon: f64, n: usize) -> Result<f64> {
        match *self {
            AuditMechanism::Exponential | AuditMechanism::Laplace => Ok(epsilon),
            AuditMechanism::Smoothing { x } => smoothing_privacy(x, n),
        }
    }
}

/// The instance achieving the largest log-ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditWitness {
    pub nodes: usize,
    /// Edges of the graph without the flipped edge.
    pub edges: Vec<(u32, u32)>,
    pub flipped: (u32, u32),
    pub target: u32,
    pub candidate: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub mechanism: AuditMechanism,
    pub epsilon: f64,
    pub max_nodes: usize,
    /// Compared (graph, neighbor graph, target) triples.
    pub instances: u64,
    pub max_ln_ratio: f64,
    /// `max_ln_ratio / epsilon`.
    pub kappa: f64,
    /// Largest `ln_ratio - guarantee(n)` over all instances; nonpositive when the
    /// claimed privacy level holds everywhere.
    pub max_excess: f64,
    pub witness: Option<AuditWitness>,
}

/// Undirected graph on at most 8 nodes as adjacency bitmasks.
#[derive(Debug, Clone, Copy)]
struct SmallGraph {
    n: usize,
    adj: [u8; 8],
}

fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            pairs.push((u, v));
        }
    }
    pairs
}

impl SmallGraph {
    fn from_mask(n: usize, pairs: &[(usize, usize)], mask: u64) -> Self {
        let mut adj = [0u8; 8];
        for (bit, &(u, v)) in pairs.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
            }
        }
        SmallGraph { n, adj }
    }

    /// Candidates of `r` with their common-neighbor counts.
    fn common_neighbors(&self, r: usize) -> (Vec<NodeId>, Vec<f64>) {
        let mut candidates = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n {
            if i != r && self.adj[r] >> i & 1 == 0 {
                candidates.push(NodeId(i as u32));
                values.push((self.adj[i] & self.adj[r]).count_ones() as f64);
            }
        }
        (candidates, values)
    }
}

/// Exhaustive audit of `mechanism` with common-neighbor utilities on every labeled graph
/// with `2..=max_nodes` nodes.
pub fn privacy_audit(mechanism: AuditMechanism, epsilon: f64, max_nodes: usize) -> Result<AuditReport> {
    if !(2..=MAX_AUDIT_NODES).contains(&max_nodes) {
        return Err(Error::Config(format!("max_nodes must lie in 2..={MAX_AUDIT_NODES}, got {max_nodes}")));
    }
    if matches!(mechanism, AuditMechanism::Laplace) && max_nodes > MAX_LAPLACE_AUDIT_NODES {
        return Err(Error::Capacity { got: max_nodes, limit: MAX_LAPLACE_AUDIT_NODES });
    }
    if let AuditMechanism::Smoothing { x } = mechanism {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Config(format!("smoothing weight must lie in [0, 1), got {x}")));
        }
    }
    // smoothing does not read ε; it is kept only to express the result as a multiple
    let params = match mechanism {
        AuditMechanism::Smoothing { .. } if epsilon.is_finite() && epsilon >= 0.0 => MechanismParams::unit(1.0)?,
        _ => MechanismParams::unit(epsilon)?,
    };

    let mut report = AuditReport {
        mechanism,
        epsilon,
        max_nodes,
        instances: 0,
        max_ln_ratio: 0.0,
        kappa: 0.0,
        max_excess: f64::NEG_INFINITY,
        witness: None,
    };

    for n in 2..=max_nodes {
        let pairs = pair_list(n);
        let masks = 1u64 << pairs.len();
        let slots = n - 1;
        for r in 0..n {
            // probabilities for every graph, one slot per non-target node; NaN marks
            // a neighbor of r
            let mut table = vec![f64::NAN; masks as usize * slots];
            for mask in 0..masks {
                let g = SmallGraph::from_mask(n, &pairs, mask);
                let (candidates, values) = g.common_neighbors(r);
                if candidates.is_empty() {
                    continue;
                }
                let uv = UtilityVector::new(NodeId(r as u32), candidates, values, 1.0)?;
                let dist = mechanism.distribution(&uv, &params)?;
                let row = &mut table[mask as usize * slots..(mask as usize + 1) * slots];
                for (c, &p) in dist.candidates().iter().zip(dist.probabilities()) {
                    let i = c.index();
                    row[if i < r { i } else { i - 1 }] = p;
                }
            }
            for mask in 0..masks {
                let g = SmallGraph::from_mask(n, &pairs, mask);
                let n_candidates = g.common_neighbors(r).0.len();
                if n_candidates == 0 {
                    continue;
                }
                let guarantee = mechanism.guarantee(epsilon, n_candidates)?;
                for (bit, &(u, v)) in pairs.iter().enumerate() {
                    if u == r || v == r || mask >> bit & 1 == 1 {
                        continue;
                    }
                    let other = mask | 1 << bit;
                    report.instances += 1;
                    for slot in 0..slots {
                        let p = table[mask as usize * slots + slot];
                        let q = table[other as usize * slots + slot];
                        if p.is_nan() {
                            continue;
                        }
                        let ratio = (p.ln() - q.ln()).abs();
                        let ratio = if ratio.is_nan() { 0.0 } else { ratio };
                        report.max_excess = report.max_excess.max(ratio - guarantee);
                        if ratio > report.max_ln_ratio || report.witness.is_none() {
                            report.max_ln_ratio = ratio.max(report.max_ln_ratio);
                            let candidate = if slot < r { slot } else { slot + 1 };
                            report.witness = Some(AuditWitness {
                                nodes: n,
                                edges: pairs
                                    .iter()
                                    .enumerate()
                                    .filter(|(b, _)| mask >> b & 1 == 1)
                                    .map(|(_, &(a, b))| (a as u32, b as u32))
                                    .collect(),
                                flipped: (u as u32, v as u32),
                                target: r as u32,
                                candidate: candidate as u32,
                            });
                        }
                    }
                }
            }
        }
    }
    report.kappa = if epsilon > 0.0 { report.max_ln_ratio / epsilon } else { f64::INFINITY };
    Ok(report)
}

/// Result of the common-neighbor rewiring that promotes a zero-utility candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewiring {
    pub graph: Graph,
    pub flips: Vec<EdgeFlip>,
    /// Helper node joined to both `r` and `x`, if one was used.
    pub helper: Option<NodeId>,
}

/// Connects zero-utility candidate `x` to every neighbor of `r`, then, if `x` is not
/// yet the strict argmax, joins a helper candidate `z` to both `r` and `x` (the `x–z`
/// edge only when absent). Helpers are tried by increasing utility, ties by id, and
/// the first one that leaves `x` as the strict argmax is kept; if none does, the
/// lowest-utility helper is used. At most `d_r + 2` additions.
pub fn common_neighbors_rewiring(g: &Graph, r: NodeId, x: NodeId) -> Result<Rewiring> {
    g.check_node(r)?;
    g.check_node(x)?;
    if x == r || g.has_edge(r, x) {
        return Err(Error::Precondition(format!("{x} is not a candidate of {r}")));
    }
    if g.common_neighbor_count(r, x)? != 0 {
        return Err(Error::Precondition(format!("{x} has positive utility for {r}")));
    }
    let base_flips: Vec<EdgeFlip> = g.neighbors(r).iter().map(|&w| EdgeFlip::add(x, w)).collect();
    let build = |helper: Option<NodeId>| -> Result<Rewiring> {
        let mut flips = base_flips.clone();
        if let Some(z) = helper {
            flips.push(EdgeFlip::add(r, z));
            if !g.has_edge(x, z) {
                flips.push(EdgeFlip::add(x, z));
            }
        }
        let mut graph = g.clone();
        for flip in &flips {
            graph = graph.apply_flip(flip)?;
        }
        Ok(Rewiring { graph, flips, helper })
    };
    let strict = |rw: &Rewiring| -> Result<bool> {
        let after = utility_vector(&rw.graph, r, &UtilityFunctionSpec::CommonNeighbors)?;
        let ux = after.values()[after.position(x).expect("x remains a candidate")];
        Ok(after.values().iter().filter(|&&v| v >= ux).count() == 1)
    };

    let plain = build(None)?;
    if strict(&plain)? {
        return Ok(plain);
    }
    let mut helpers: Vec<(usize, NodeId)> = Vec::new();
    for z in g.candidate_set(r)? {
        if z != x {
            helpers.push((g.common_neighbor_count(r, z)?, z));
        }
    }
    helpers.sort();
    let mut fallback = None;
    for &(_, z) in &helpers {
        let rw = build(Some(z))?;
        if strict(&rw)? {
            return Ok(rw);
        }
        fallback.get_or_insert(rw);
    }
    Ok(fallback.unwrap_or(plain))
}
