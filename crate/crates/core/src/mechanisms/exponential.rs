use super::{MechanismParams, RecommendationDistribution};
use crate::error::Result;
use crate::utility::UtilityVector;

/// `p_i ∝ exp(ε · u_i / Δf)`, evaluated with exponents shifted by `u_max`.
pub fn exponential_distribution(uv: &UtilityVector, params: &MechanismParams) -> Result<RecommendationDistribution> {
    params.check_against(uv)?;
    let rate = params.epsilon / params.delta_f;
    let top = uv.u_max();
    let weights = uv.values().iter().map(|&u| (rate * (u - top)).exp()).collect();
    RecommendationDistribution::from_weights(uv.candidates().to_vec(), weights)
}
