//! Per-target utility vectors: common neighbors and truncated weighted paths.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityFunctionSpec {
    /// `u_i = |N(i) ∩ N(r)|`.
    CommonNeighbors,
    /// `u_i = Σ_{l=2..max_length} gamma^(l-1) · walks_l(r, i)`.
    WeightedPaths { gamma: f64, max_length: usize },
}

impl UtilityFunctionSpec {
    pub const DEFAULT_MAX_LENGTH: usize = 4;

    pub fn weighted_paths(gamma: f64, max_length: usize) -> Result<Self> {
        let spec = UtilityFunctionSpec::WeightedPaths { gamma, max_length };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let UtilityFunctionSpec::WeightedPaths { gamma, max_length } = *self {
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(Error::Config(format!("gamma must lie in (0, 1), got {gamma}")));
            }
            if max_length < 2 {
                return Err(Error::Config(format!("max_length must be at least 2, got {max_length}")));
            }
        }
        Ok(())
    }

    /// Per-coordinate sensitivity of the raw (unscaled) utility under one edge flip
    /// not incident on the target.
    ///
    /// For weighted paths this is `Σ_{l=2..L} γ^(l-1) (l-1) d_max^(l-2)`: a length-`l`
    /// walk uses the flipped edge in one of `l-1` interior slots, and each slot admits
    /// at most `d_max^(l-2)` completions.
    pub fn sensitivity(&self, d_max: usize) -> f64 {
        match *self {
            UtilityFunctionSpec::CommonNeighbors => 1.0,
            UtilityFunctionSpec::WeightedPaths { gamma, max_length } => (2..=max_length)
                .map(|l| gamma.powi(l as i32 - 1) * (l - 1) as f64 * (d_max as f64).powi(l as i32 - 2))
                .sum::<f64>()
                .max(f64::MIN_POSITIVE),
        }
    }
}

/// Utilities of recommending each candidate to `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector {
    target: NodeId,
    candidates: Vec<NodeId>,
    values: Vec<f64>,
    sensitivity: f64,
    u_max: f64,
}

impl UtilityVector {
    pub fn new(target: NodeId, candidates: Vec<NodeId>, values: Vec<f64>, sensitivity: f64) -> Result<Self> {
        if candidates.len() != values.len() {
            return Err(Error::Precondition(format!(
                "{} candidates but {} values",
                candidates.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Domain(format!("utilities must be finite and nonnegative, got {bad}")));
        }
        if !(sensitivity.is_finite() && sensitivity > 0.0) {
            return Err(Error::Domain(format!("sensitivity must be positive, got {sensitivity}")));
        }
        let u_max = values.iter().copied().fold(0.0, f64::max);
        Ok(UtilityVector { target, candidates, values, sensitivity, u_max })
    }

    /// A free-standing vector over candidates `0..len` with unit sensitivity.
    /// The target is the virtual node `len`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(NodeId::from(n), (0..n).map(NodeId::from).collect(), values, 1.0)
    }

    pub fn target(&self) -> NodeId {
        self.target
    }

    pub fn candidates(&self) -> &[NodeId] {
        &self.candidates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when no candidate has positive utility; such targets are skipped by the harness.
    pub fn is_degenerate(&self) -> bool {
        self.u_max <= 0.0
    }

    /// Number of candidates with `u_i > (1 - c) · u_max`.
    pub fn high_utility_count(&self, c: f64) -> usize {
        let threshold = (1.0 - c) * self.u_max;
        self.values.iter().filter(|&&u| u > threshold).count()
    }

    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.candidates.binary_search(&node).ok()
    }
}

/// Computes the utility vector of `spec` for target `r` over `g.candidate_set(r)`.
pub fn utility_vector(g: &Graph, r: NodeId, spec: &UtilityFunctionSpec) -> Result<UtilityVector> {
    spec.validate()?;
    let candidates = g.candidate_set(r)?;
    let (dense, sensitivity) = match *spec {
        UtilityFunctionSpec::CommonNeighbors => {
            let mut counts = vec![0u32; g.n()];
            for &w in g.neighbors(r) {
                for &x in g.neighbors(w) {
                    counts[x.index()] += 1;
                }
            }
            (counts.into_iter().map(f64::from).collect::<Vec<_>>(), 1.0)
        }
        UtilityFunctionSpec::WeightedPaths { gamma, max_length } => {
            (weighted_walk_scores(g, r, gamma, max_length), spec.sensitivity(g.max_degree()))
        }
    };
    let values = candidates.iter().map(|c| dense[c.index()]).collect();
    UtilityVector::new(r, candidates, values, sensitivity)
}

/// Dense `Σ_{l=2..max_length} γ^(l-1) · walks_l(r, ·)` by repeated adjacency expansion.
fn weighted_walk_scores(g: &Graph, r: NodeId, gamma: f64, max_length: usize) -> Vec<f64> {
    let n = g.n();
    let mut walks = vec![0.0f64; n];
    walks[r.index()] = 1.0;
    let mut next = vec![0.0f64; n];
    let mut score = vec![0.0f64; n];
    let mut weight = 1.0;
    for l in 1..=max_length {
        for (x, slot) in next.iter_mut().enumerate() {
            *slot = g.neighbors(NodeId::from(x)).iter().map(|y| walks[y.index()]).sum();
        }
        std::mem::swap(&mut walks, &mut next);
        if l >= 2 {
            weight *= gamma;
            for (s, w) in score.iter_mut().zip(&walks) {
                *s += weight * w;
            }
        }
    }
    score
}

/// Divides utilities by the recorded sensitivity so that `Δf = 1`.
pub fn scale_to_unit_sensitivity(uv: &UtilityVector) -> UtilityVector {
    let s = uv.sensitivity;
    UtilityVector {
        target: uv.target,
        candidates: uv.candidates.clone(),
        values: uv.values.iter().map(|v| v / s).collect(),
        sensitivity: 1.0,
        u_max: uv.u_max / s,
    }
}

/// Smallest `β` such that the `β` largest utilities carry at least `fraction` of the total mass.
pub fn concentration_beta(uv: &UtilityVector, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Domain(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    let total: f64 = uv.values.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroUtility);
    }
    let mut sorted = uv.values.clone();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let goal = fraction * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        acc += v;
        if acc >= goal {
            return Ok(i + 1);
        }
    }
    Ok(sorted.len())
}

/// Checks that relabeling nodes by `perm` (which must fix `r`) relabels the utilities:
/// `u_i(G, r) = u_{perm(i)}(G_perm, r)` for every candidate `i`.
pub fn exchangeability_check(g: &Graph, r: NodeId, spec: &UtilityFunctionSpec, perm: &[NodeId]) -> Result<bool> {
    g.check_node(r)?;
    if perm.get(r.index()) != Some(&r) {
        return Err(Error::Precondition(format!("permutation must fix target {r}")));
    }
    let permuted = g.permuted(perm)?;
    let base = utility_vector(g, r, spec)?;
    let moved = utility_vector(&permuted, r, spec)?;
    if base.len() != moved.len() {
        return Ok(false);
    }
    for (&i, &u) in base.candidates.iter().zip(&base.values) {
        let Some(pos) = moved.position(perm[i.index()]) else {
            return Ok(false);
        };
        let v = moved.values[pos];
        if (u - v).abs() > 1e-9 * u.abs().max(v.abs()).max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}
