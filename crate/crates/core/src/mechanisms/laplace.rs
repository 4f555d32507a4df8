//! Report-noisy-max with Laplace noise, plus exact selection probabilities.

use rand::distributions::Open01;
use rand::Rng;

use super::{MechanismParams, RecommendationDistribution};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::quadrature;
use crate::utility::UtilityVector;

/// Largest candidate set accepted by [`laplace_selection_probabilities`].
pub const MAX_QUADRATURE_CANDIDATES: usize = 64;

/// Half-width of the integration window, in noise scales.
const WINDOW_SCALES: f64 = 40.0;
const QUADRATURE_TOLERANCE: f64 = 1e-12;

/// One draw from Laplace(0, scale) by inverse CDF.
pub fn laplace_noise<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    let u: f64 = rng.sample(Open01);
    if u < 0.5 {
        scale * (2.0 * u).ln()
    } else {
        -scale * (2.0 * (1.0 - u)).ln()
    }
}

/// Maximum of `count` i.i.d. Laplace(0, scale) draws via `F^{-1}(U^{1/count})`.
fn laplace_max_noise<R: Rng + ?Sized>(rng: &mut R, scale: f64, count: usize) -> f64 {
    if count == 1 {
        return laplace_noise(rng, scale);
    }
    let u: f64 = rng.sample(Open01);
    let ln_q = u.ln() / count as f64;
    let q = ln_q.exp();
    if q < 0.5 {
        scale * (std::f64::consts::LN_2 + ln_q)
    } else {
        // 1 - q without cancellation
        -scale * (2.0 * -ln_q.exp_m1()).ln()
    }
}

/// Adds Laplace(Δf/ε) noise to every utility and returns the noisy argmax.
/// Exact ties go to the smallest candidate id.
pub fn laplace_recommend_naive<R: Rng + ?Sized>(uv: &UtilityVector, params: &MechanismParams, rng: &mut R) -> Result<NodeId> {
    params.check_against(uv)?;
    let scale = params.noise_scale();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, &u) in uv.values().iter().enumerate() {
        let noisy = u + laplace_noise(rng, scale);
        if noisy > best.0 {
            best = (noisy, i);
        }
    }
    Ok(uv.candidates()[best.1])
}

/// Candidates bucketed by equal utility, for report-noisy-max in time linear in the
/// number of distinct utility values.
///
/// Within a bucket the noisy maximum is the bucket value plus the maximum of `z`
/// Laplace draws, and by symmetry the winner inside a winning bucket is uniform.
#[derive(Debug, Clone)]
pub struct LaplaceGroups {
    scale: f64,
    values: Vec<f64>,
    members: Vec<Vec<usize>>,
}

impl LaplaceGroups {
    pub fn new(uv: &UtilityVector, params: &MechanismParams) -> Result<Self> {
        params.check_against(uv)?;
        let mut order: Vec<usize> = (0..uv.len()).collect();
        let vals = uv.values();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        let mut values: Vec<f64> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for i in order {
            if values.last() == Some(&vals[i]) {
                members.last_mut().unwrap().push(i);
            } else {
                values.push(vals[i]);
                members.push(vec![i]);
            }
        }
        Ok(LaplaceGroups { scale: params.noise_scale(), values, members })
    }

    pub fn group_count(&self) -> usize {
        self.values.len()
    }

    /// Index into the utility vector of one noisy-argmax draw.
    pub fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (g, (&value, members)) in self.values.iter().zip(&self.members).enumerate() {
            let noisy = value + laplace_max_noise(rng, self.scale, members.len());
            if noisy > best.0 {
                best = (noisy, g);
            }
        }
        let members = &self.members[best.1];
        if members.len() == 1 {
            members[0]
        } else {
            members[rng.gen_range(0..members.len())]
        }
    }

    /// Utility of one noisy-argmax draw.
    pub fn draw_value<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (&value, members) in self.values.iter().zip(&self.members) {
            let noisy = value + laplace_max_noise(rng, self.scale, members.len());
            if noisy > best.0 {
                best = (noisy, value);
            }
        }
        best.1
    }
}

/// Report-noisy-max through the bucketed sampler; distributionally identical to
/// [`laplace_recommend_naive`].
pub fn laplace_recommend<R: Rng + ?Sized>(uv: &UtilityVector, params: &MechanismParams, rng: &mut R) -> Result<NodeId> {
    let groups = LaplaceGroups::new(uv, params)?;
    Ok(uv.candidates()[groups.draw_index(rng)])
}

/// Probability that the higher of two utilities wins report-noisy-max with unit sensitivity:
/// `1 - e^{-εd} (1/2 + εd/4)` where `d = u1 - u2`.
pub fn laplace_two_node_win_prob(u1: f64, u2: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if u1 < u2 {
        return Err(Error::Precondition(format!("expected u1 >= u2, got {u1} < {u2}")));
    }
    let x = epsilon * (u1 - u2);
    Ok(1.0 - (-x).exp() * (0.5 + 0.25 * x))
}

fn laplace_pdf(x: f64, scale: f64) -> f64 {
    (-x.abs() / scale).exp() / (2.0 * scale)
}

fn laplace_ln_cdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        x / scale - std::f64::consts::LN_2
    } else {
        (-0.5 * (-x / scale).exp()).ln_1p()
    }
}

/// `f(x) / F(x)`.
fn laplace_hazard_ratio(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        1.0 / scale
    } else {
        let tail = 0.5 * (-x / scale).exp();
        tail / (scale * (1.0 - tail))
    }
}

fn laplace_cdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale).exp()
    } else {
        1.0 - 0.5 * (-x / scale).exp()
    }
}

/// Exact selection probabilities of report-noisy-max,
/// `p_i = ∫ f(y - u_i) Π_{j≠i} F(y - u_j) dy`, by adaptive quadrature.
pub fn laplace_selection_probabilities(uv: &UtilityVector, params: &MechanismParams) -> Result<RecommendationDistribution> {
    params.check_against(uv)?;
    if uv.len() > MAX_QUADRATURE_CANDIDATES {
        return Err(Error::Capacity { got: uv.len(), limit: MAX_QUADRATURE_CANDIDATES });
    }
    let scale = params.noise_scale();
    let values = uv.values();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - WINDOW_SCALES * scale;
    let hi = uv.u_max() + WINDOW_SCALES * scale;
    let probabilities = (0..values.len())
        .map(|i| {
            let integrand = |y: f64| {
                let mut acc = laplace_pdf(y - values[i], scale);
                for (j, &u) in values.iter().enumerate() {
                    if j != i {
                        acc *= laplace_cdf(y - u, scale);
                    }
                }
                acc
            };
            quadrature::integrate(integrand, lo, hi, QUADRATURE_TOLERANCE, values)
        })
        .collect();
    RecommendationDistribution::new(uv.candidates().to_vec(), probabilities)
}

/// Exact probability that each equal-utility group of [`LaplaceGroups`] wins
/// report-noisy-max, as `(utility, group size, probability)` in decreasing utility.
///
/// Group `g` of size `z` wins with probability
/// `∫ z f(y - u_g) F(y - u_g)^{z-1} Π_{h≠g} F(y - u_h)^{z_h} dy`, so the cost grows with
/// the number of distinct utilities rather than the number of candidates.
pub fn laplace_group_probabilities(uv: &UtilityVector, params: &MechanismParams) -> Result<Vec<(f64, usize, f64)>> {
    let groups = LaplaceGroups::new(uv, params)?;
    let scale = groups.scale;
    let sizes: Vec<usize> = groups.members.iter().map(Vec::len).collect();
    let lo = groups.values.last().copied().unwrap_or(0.0) - WINDOW_SCALES * scale;
    // the maximum of z draws sits about scale·ln(z/2) above its center
    let hi = groups.values[0] + (WINDOW_SCALES + (uv.len() as f64).ln()) * scale;
    // Group g wins with density z_g · (f/F)(y − u_g) · M(y), where M = Π_h F(y − u_h)^{z_h}
    // is the CDF of the overall maximum, so one shared M serves every group.
    let values = &groups.values;
    let integrand = |y: f64, out: &mut [f64]| {
        let ln_max: f64 = values.iter().zip(&sizes).map(|(&u, &z)| z as f64 * laplace_ln_cdf(y - u, scale)).sum();
        let m = ln_max.exp();
        for ((o, &u), &z) in out.iter_mut().zip(values).zip(&sizes) {
            *o = z as f64 * laplace_hazard_ratio(y - u, scale) * m;
        }
    };
    let probabilities = quadrature::integrate_vec(integrand, values.len(), lo, hi, QUADRATURE_TOLERANCE, values);
    let out = values.iter().zip(&sizes).zip(probabilities).map(|((&u, &z), p)| (u, z, p)).collect();
    Ok(out)
}

/// Exact expected accuracy of report-noisy-max, `Σ_g P(g wins) · u_g / u_max`.
pub fn laplace_expected_accuracy(uv: &UtilityVector, params: &MechanismParams) -> Result<f64> {
    if uv.is_degenerate() {
        return Err(Error::ZeroUtility);
    }
    let groups = laplace_group_probabilities(uv, params)?;
    let expected: f64 = groups.iter().map(|&(u, _, p)| u * p).sum();
    Ok((expected / uv.u_max()).clamp(0.0, 1.0))
}
