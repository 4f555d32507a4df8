//! Linear smoothing: mix any base distribution with the uniform one.

use super::RecommendationDistribution;
use crate::error::{Error, Result};

/// `p''_i = (1 - x)/n + x · p_i`.
pub fn linear_smoothing(dist: &RecommendationDistribution, x: f64) -> Result<RecommendationDistribution> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("smoothing weight must lie in [0, 1], got {x}")));
    }
    let floor = (1.0 - x) / dist.len() as f64;
    let probabilities = dist.probabilities().iter().map(|p| floor + x * p).collect();
    RecommendationDistribution::new(dist.candidates().to_vec(), probabilities)
}

/// Privacy level `ln(1 + n·x/(1-x))` of smoothing with weight `x` over `n` candidates.
/// Returns `f64::INFINITY` for `x = 1`, where no privacy is left.
pub fn smoothing_privacy(x: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("smoothing weight must lie in [0, 1], got {x}")));
    }
    if n == 0 {
        return Err(Error::Domain("candidate count must be positive".into()));
    }
    if x == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((n as f64 * x / (1.0 - x)).ln_1p())
}

/// Weight `x` whose smoothing privacy is exactly `epsilon`: `(e^ε - 1)/(e^ε - 1 + n)`.
pub fn smoothing_param_for_epsilon(epsilon: f64, n: usize) -> Result<f64> {
    if !(epsilon >= 0.0) || n == 0 {
        return Err(Error::Domain(format!("need epsilon >= 0 and n >= 1, got ({epsilon}, {n})")));
    }
    let grow = epsilon.exp_m1();
    Ok(grow / (grow + n as f64))
}

/// Weight achieving `2ε`-privacy for `ε = c · ln n`: `(n^{2c} - 1)/(n^{2c} - 1 + n)`.
pub fn smoothing_param_for_privacy(c: f64, n: usize) -> Result<f64> {
    if !(c > 0.0) || n < 2 {
        return Err(Error::Domain(format!("need c > 0 and n >= 2, got ({c}, {n})")));
    }
    let grow = (2.0 * c * (n as f64).ln()).exp_m1();
    Ok(grow / (grow + n as f64))
}
