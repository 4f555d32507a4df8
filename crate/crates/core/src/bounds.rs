//! Privacy/accuracy trade-off formulas and per-target accuracy ceilings.
//!
//! Notation: `n` candidates, of which `k` are "high utility" (`u_i > (1-c)·u_max`);
//! `t` is the number of edge alterations that turn the least likely low-utility
//! candidate into the utility maximizer. All logarithms are natural.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::utility::{utility_vector, UtilityFunctionSpec, UtilityVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    pub n: usize,
    pub k: usize,
    pub t: u64,
    pub c: f64,
    pub epsilon: f64,
    /// Concentration parameter; only read by the concentration bound.
    pub beta: usize,
    /// Utility loss; only read by [`epsilon_lower_bound`].
    pub delta: f64,
}

impl BoundInputs {
    pub fn new(n: usize, k: usize, t: u64, c: f64, epsilon: f64) -> Self {
        BoundInputs { n, k, t, c, epsilon, beta: 1, delta: 0.0 }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        BoundInputs { delta, ..self }
    }

    pub fn with_beta(self, beta: usize) -> Self {
        BoundInputs { beta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k > self.n {
            return Err(Error::Domain(format!("k = {} exceeds n = {}", self.k, self.n)));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(Error::Domain(format!("c must lie in (0, 1], got {}", self.c)));
        }
        if self.t == 0 {
            return Err(Error::Domain("t must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Domain(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Best accuracy any monotone ε-private algorithm can guarantee:
/// `1 - c(n-k) / ((n-k) + (k+1) e^{εt})`, clamped to `[0, 1]`.
pub fn accuracy_upper_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    if b.n == b.k {
        return Ok(1.0);
    }
    let low = (b.n - b.k) as f64;
    let grow = (b.k + 1) as f64 * (b.epsilon * b.t as f64).exp();
    let loss = b.c * low / (low + grow);
    Ok((1.0 - loss).clamp(0.0, 1.0))
}

/// Smallest ε compatible with accuracy `1 - δ`:
/// `(1/t)(ln((c-δ)/δ) + ln((n-k)/(k+1)))`.
pub fn epsilon_lower_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    if !(b.delta > 0.0 && b.delta < b.c) {
        return Err(Error::Domain(format!("delta must lie in (0, c = {}), got {}", b.c, b.delta)));
    }
    if b.n == b.k {
        return Err(Error::Domain("no low-utility candidates (n = k)".into()));
    }
    let loss_term = ((b.c - b.delta) / b.delta).ln();
    let size_term = ((b.n - b.k) as f64 / (b.k + 1) as f64).ln();
    Ok((loss_term + size_term) / b.t as f64)
}

/// Finite-n concentration bound `(ln n - ln β - ln ln n) / t`.
pub fn epsilon_lower_bound_concentration(n: usize, beta: usize, t: u64) -> Result<f64> {
    if n < 3 || beta == 0 || t == 0 {
        return Err(Error::Domain(format!("need n >= 3, beta >= 1, t >= 1; got ({n}, {beta}, {t})")));
    }
    let ln_n = (n as f64).ln();
    Ok((ln_n - (beta as f64).ln() - ln_n.ln()) / t as f64)
}

/// Generic alteration budget `4 · d_max`: swap the neighborhoods of two nodes.
pub fn t_generic(g: &Graph) -> Result<u64> {
    if g.n() == 0 {
        return Err(Error::Domain("empty graph".into()));
    }
    Ok(4 * g.max_degree() as u64)
}

/// Common-neighbors budget `d_r + 2`.
pub fn t_common_neighbors(g: &Graph, r: NodeId) -> Result<u64> {
    g.check_node(r)?;
    Ok(g.degree(r) as u64 + 2)
}

/// Smallest `c >= 1` with `(c - 1) >= s (c + 1)^2`, by bisection.
///
/// The inequality is feasible iff `1 - 8s >= 0`; the left root is bracketed by
/// `c = 1` and the vertex `(1 - 2s) / (2s)` of the quadratic.
pub fn rewiring_constant(s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("s must be finite and nonnegative, got {s}")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let slack = |c: f64| (c - 1.0) - s * (c + 1.0) * (c + 1.0);
    let vertex = (1.0 - 2.0 * s) / (2.0 * s);
    if vertex < 1.0 || slack(vertex) < 0.0 {
        return Err(Error::Infeasible { s });
    }
    let (mut lo, mut hi) = (1.0, vertex);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if slack(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Weighted-paths budget `⌈d_r + 2(c-1)d_r⌉` with `c` from [`rewiring_constant`]
/// at `s = γ d_max / (1 - γ d_max)`.
pub fn t_weighted_paths(g: &Graph, r: NodeId, gamma: f64) -> Result<u64> {
    g.check_node(r)?;
    let gd = gamma * g.max_degree() as f64;
    if !(gamma > 0.0) || gd >= 1.0 {
        return Err(Error::Precondition(format!("need 0 < gamma * d_max < 1, got {gd}")));
    }
    let c = rewiring_constant(gd / (1.0 - gd))?;
    let d_r = g.degree(r) as f64;
    Ok((d_r + 2.0 * (c - 1.0) * d_r - 1e-9).ceil().max(0.0) as u64)
}

/// Alteration budget for the given utility family; weighted paths falls back to
/// [`t_generic`] when no rewiring constant exists.
pub fn alteration_budget(g: &Graph, r: NodeId, spec: &UtilityFunctionSpec) -> Result<u64> {
    let t = match *spec {
        UtilityFunctionSpec::CommonNeighbors => t_common_neighbors(g, r)?,
        UtilityFunctionSpec::WeightedPaths { gamma, .. } => match t_weighted_paths(g, r, gamma) {
            Ok(t) => t,
            Err(Error::Infeasible { .. }) | Err(Error::Precondition(_)) => t_generic(g)?,
            Err(e) => return Err(e),
        },
    };
    Ok(t.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeBound {
    pub target: NodeId,
    pub accuracy_ceiling: f64,
    pub t_used: u64,
    pub k_used: usize,
    pub c_used: f64,
}

/// Tightest accuracy ceiling over `c_grid` for an already computed utility vector.
pub fn ceiling_for_vector(uv: &UtilityVector, t: u64, epsilon: f64, c_grid: &[f64]) -> Result<NodeBound> {
    if uv.is_degenerate() {
        return Err(Error::ZeroUtility);
    }
    if c_grid.is_empty() {
        return Err(Error::Config("c grid is empty".into()));
    }
    let mut best: Option<NodeBound> = None;
    for &c in c_grid {
        let k = uv.high_utility_count(c);
        let ceiling = accuracy_upper_bound(&BoundInputs::new(uv.len(), k, t, c, epsilon))?;
        if best.map_or(true, |b| ceiling < b.accuracy_ceiling) {
            best = Some(NodeBound { target: uv.target(), accuracy_ceiling: ceiling, t_used: t, k_used: k, c_used: c });
        }
    }
    Ok(best.unwrap())
}

/// Per-target accuracy ceiling: minimum of the accuracy bound over `c_grid`.
pub fn node_accuracy_ceiling(
    g: &Graph,
    r: NodeId,
    spec: &UtilityFunctionSpec,
    epsilon: f64,
    c_grid: &[f64],
) -> Result<NodeBound> {
    let uv = utility_vector(g, r, spec)?;
    let t = alteration_budget(g, r, spec)?;
    ceiling_for_vector(&uv, t, epsilon, c_grid)
}

/// Guaranteed ratio of exponential-mechanism accuracy to the ceiling:
/// `1/(k+1)` in general, `k/(k+1)` when all nonzero utilities are equal.
pub fn exp_mech_ratio_floor(k: usize, flat_top: bool) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let k = k as f64;
    Ok(if flat_top { k / (k + 1.0) } else { 1.0 / (k + 1.0) })
}
