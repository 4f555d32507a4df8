//! Private selection mechanisms over a utility vector.
//!
//! All mechanisms take utilities already expressed against a sensitivity `Δf`
//! (normally 1 after [`scale_to_unit_sensitivity`](crate::utility::scale_to_unit_sensitivity)).

mod exponential;
mod laplace;
mod smoothing;

pub use exponential::exponential_distribution;
pub use laplace::{
    laplace_expected_accuracy, laplace_group_probabilities, laplace_noise, laplace_recommend, laplace_recommend_naive, laplace_selection_probabilities,
    laplace_two_node_win_prob, LaplaceGroups, MAX_QUADRATURE_CANDIDATES,
};
pub use smoothing::{
    linear_smoothing, smoothing_param_for_epsilon, smoothing_param_for_privacy, smoothing_privacy,
};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, WeightedAliasIndex};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::utility::UtilityVector;

/// Tolerance on `Σ p_i = 1` for every emitted distribution.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MechanismParams {
    pub epsilon: f64,
    pub delta_f: f64,
    pub seed: u64,
}

impl MechanismParams {
    pub fn new(epsilon: f64, delta_f: f64, seed: u64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(delta_f.is_finite() && delta_f > 0.0) {
            return Err(Error::Domain(format!("sensitivity must be positive, got {delta_f}")));
        }
        Ok(MechanismParams { epsilon, delta_f, seed })
    }

    /// Unit sensitivity, seed 0.
    pub fn unit(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 1.0, 0)
    }

    /// Laplace scale `Δf / ε`.
    pub fn noise_scale(&self) -> f64 {
        self.delta_f / self.epsilon
    }

    fn check_against(&self, uv: &UtilityVector) -> Result<()> {
        let s = uv.sensitivity();
        if (s - self.delta_f).abs() > 1e-12 * s.max(self.delta_f) {
            return Err(Error::Precondition(format!(
                "utility sensitivity {s} does not match mechanism sensitivity {}",
                self.delta_f
            )));
        }
        if uv.is_empty() {
            return Err(Error::Domain("empty candidate set".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Exponential,
    Laplace,
    /// Linear smoothing of the non-private argmax, calibrated to the requested ε.
    Smoothing,
}

impl Mechanism {
    pub const ALL: [Mechanism; 3] = [Mechanism::Exponential, Mechanism::Laplace, Mechanism::Smoothing];

    pub fn short_name(self) -> &'static str {
        match self {
            Mechanism::Exponential => "exp",
            Mechanism::Laplace => "lap",
            Mechanism::Smoothing => "smooth",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" | "exponential" => Ok(Mechanism::Exponential),
            "lap" | "laplace" => Ok(Mechanism::Laplace),
            "smooth" | "smoothing" => Ok(Mechanism::Smoothing),
            other => Err(Error::Config(format!("unknown mechanism {other:?}"))),
        }
    }
}

/// Probability vector over an ordered candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationDistribution {
    candidates: Vec<NodeId>,
    probabilities: Vec<f64>,
}

impl RecommendationDistribution {
    pub fn new(candidates: Vec<NodeId>, probabilities: Vec<f64>) -> Result<Self> {
        if candidates.len() != probabilities.len() {
            return Err(Error::Precondition("candidates and probabilities differ in length".into()));
        }
        if candidates.is_empty() {
            return Err(Error::Domain("empty candidate set".into()));
        }
        if let Some(p) = probabilities.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Domain(format!("invalid probability {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(RecommendationDistribution { candidates, probabilities })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(candidates: Vec<NodeId>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Domain(format!("weights sum to {total}")));
        }
        Self::new(candidates, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(candidates: Vec<NodeId>) -> Result<Self> {
        let n = candidates.len();
        Self::new(candidates, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(candidates: Vec<NodeId>, at: NodeId) -> Result<Self> {
        let probabilities = candidates.iter().map(|&c| if c == at { 1.0 } else { 0.0 }).collect();
        Self::new(candidates, probabilities)
    }

    pub fn candidates(&self) -> &[NodeId] {
        &self.candidates
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probability_of(&self, node: NodeId) -> Option<f64> {
        self.candidates.iter().position(|&c| c == node).map(|i| self.probabilities[i])
    }

    /// Alias table for repeated O(1) draws.
    pub fn sampler(&self) -> Sampler<'_> {
        let alias = WeightedAliasIndex::new(self.probabilities.clone()).expect("validated distribution");
        Sampler { dist: self, alias }
    }

    /// `(candidate, probability)` pairs sorted by decreasing probability, ties by id.
    pub fn top(&self, count: usize) -> Vec<(NodeId, f64)> {
        let mut pairs: Vec<(NodeId, f64)> =
            self.candidates.iter().copied().zip(self.probabilities.iter().copied()).collect();
        pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        pairs.truncate(count);
        pairs
    }
}

pub struct Sampler<'a> {
    dist: &'a RecommendationDistribution,
    alias: WeightedAliasIndex<f64>,
}

impl Sampler<'_> {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        self.dist.candidates[self.alias.sample(rng)]
    }

    pub fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }
}

/// Draws one candidate with probability `p_i`.
pub fn sample<R: Rng + ?Sized>(dist: &RecommendationDistribution, rng: &mut R) -> NodeId {
    dist.sampler().draw(rng)
}

/// Non-private baseline: uniform over the maximal-utility candidates.
pub fn argmax_distribution(uv: &UtilityVector) -> Result<RecommendationDistribution> {
    if uv.is_empty() {
        return Err(Error::Domain("empty candidate set".into()));
    }
    let top = uv.u_max();
    let weights = uv.values().iter().map(|&u| if u == top { 1.0 } else { 0.0 }).collect();
    RecommendationDistribution::from_weights(uv.candidates().to_vec(), weights)
}

/// `Σ u_i p_i / u_max`.
pub fn expected_accuracy(dist: &RecommendationDistribution, uv: &UtilityVector) -> Result<f64> {
    if dist.candidates() != uv.candidates() {
        return Err(Error::Precondition("distribution and utility vector are not aligned".into()));
    }
    if uv.is_degenerate() {
        return Err(Error::ZeroUtility);
    }
    let expected: f64 = dist.probabilities().iter().zip(uv.values()).map(|(p, u)| p * u).sum();
    Ok((expected / uv.u_max()).clamp(0.0, 1.0))
}
