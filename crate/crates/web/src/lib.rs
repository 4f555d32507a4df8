//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function returns a JSON string; the plain-Rust twins without the
//! `wasm_bindgen` wrapper are what the tests exercise.

use privrec_core::bounds::{accuracy_upper_bound, ceiling_for_vector, BoundInputs};
use privrec_core::mechanisms::{
    argmax_distribution, expected_accuracy, exponential_distribution, laplace_expected_accuracy,
    laplace_group_probabilities, laplace_two_node_win_prob, linear_smoothing, smoothing_param_for_epsilon,
};
use privrec_core::{MechanismParams, UtilityVector};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest utility vector the page accepts; keeps the Laplace integral interactive.
pub const MAX_CANDIDATES: usize = 2000;
const MAX_CURVE_POINTS: usize = 2000;

#[derive(Debug, Serialize)]
pub struct MechanismRow {
    pub name: &'static str,
    pub probabilities: Vec<f64>,
    pub accuracy: f64,
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub utilities: Vec<f64>,
    pub mechanisms: Vec<MechanismRow>,
    /// Ceiling for a target with these utilities and alteration budget `t`, at c = 1.
    pub ceiling: f64,
    pub k: usize,
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub values: Vec<f64>,
}

fn parse_utilities(text: &str) -> Result<Vec<f64>, String> {
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("not a number: {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("enter at least one utility".into());
    }
    if values.len() > MAX_CANDIDATES {
        return Err(format!("at most {MAX_CANDIDATES} utilities"));
    }
    if values.iter().any(|u| !(u.is_finite() && *u >= 0.0)) {
        return Err("utilities must be finite and nonnegative".into());
    }
    Ok(values)
}

/// Exponential, Laplace and smoothing probabilities for one utility vector
/// (unit sensitivity), with expected accuracies and the matching ceiling.
pub fn compare(utilities: &str, epsilon: f64, t: u32) -> Result<Comparison, String> {
    let values = parse_utilities(utilities)?;
    let uv = UtilityVector::from_values(values.clone()).map_err(|e| e.to_string())?;
    if uv.is_degenerate() {
        return Err("at least one utility must be positive".into());
    }
    let params = MechanismParams::unit(epsilon).map_err(|e| e.to_string())?;
    let err = |e: privrec_core::Error| e.to_string();

    let exp = exponential_distribution(&uv, &params).map_err(err)?;
    let groups = laplace_group_probabilities(&uv, &params).map_err(err)?;
    let lap: Vec<f64> = values
        .iter()
        .map(|v| groups.iter().find(|g| g.0 == *v).map_or(0.0, |&(_, size, p)| p / size as f64))
        .collect();
    let x = smoothing_param_for_epsilon(epsilon, uv.len()).map_err(err)?;
    let smooth = linear_smoothing(&argmax_distribution(&uv).map_err(err)?, x).map_err(err)?;
    let bound = ceiling_for_vector(&uv, u64::from(t.max(1)), epsilon, &[1.0]).map_err(err)?;

    Ok(Comparison {
        mechanisms: vec![
            MechanismRow {
                name: "exponential",
                accuracy: expected_accuracy(&exp, &uv).map_err(err)?,
                probabilities: exp.probabilities().to_vec(),
            },
            MechanismRow {
                name: "laplace",
                accuracy: laplace_expected_accuracy(&uv, &params).map_err(err)?,
                probabilities: lap,
            },
            MechanismRow {
                name: "smoothing",
                accuracy: expected_accuracy(&smooth, &uv).map_err(err)?,
                probabilities: smooth.probabilities().to_vec(),
            },
        ],
        utilities: values,
        ceiling: bound.accuracy_ceiling,
        k: bound.k_used,
    })
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(format!("need 0 <= lo < hi, got [{lo}, {hi}]"));
    }
    if !(2..=MAX_CURVE_POINTS).contains(&points) {
        return Err(format!("points must lie in 2..={MAX_CURVE_POINTS}"));
    }
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}

/// Accuracy ceiling against ε for `n` candidates, `k` of them high-utility, budget `t`,
/// one series per threshold in `c_values`.
pub fn ceiling_curve(n: u32, k: u32, t: u32, c_values: &[f64], eps_max: f64, points: usize) -> Result<Vec<CurvePoint>, String> {
    if k > n || n == 0 {
        return Err(format!("need 0 <= k <= n and n >= 1, got n={n}, k={k}"));
    }
    grid(0.0, eps_max, points)?
        .into_iter()
        .map(|eps| {
            let values = c_values
                .iter()
                .map(|&c| accuracy_upper_bound(&BoundInputs::new(n as usize, k as usize, u64::from(t), c, eps)))
                .collect::<privrec_core::Result<Vec<f64>>>()
                .map_err(|e| e.to_string())?;
            Ok(CurvePoint { x: eps, values })
        })
        .collect()
}

/// Win probability of the better of two candidates against `ε·d`: Laplace, then exponential.
pub fn two_node_curve(max_gap: f64, points: usize) -> Result<Vec<CurvePoint>, String> {
    grid(0.0, max_gap, points)?
        .into_iter()
        .map(|x| {
            let lap = if x == 0.0 { 0.5 } else { laplace_two_node_win_prob(x, 0.0, 1.0).map_err(|e| e.to_string())? };
            let exp = 1.0 / (1.0 + (-x).exp());
            Ok(CurvePoint { x, values: vec![lap, exp] })
        })
        .collect()
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = compareMechanisms)]
pub fn compare_mechanisms_js(utilities: &str, epsilon: f64, t: u32) -> Result<String, JsError> {
    to_js(compare(utilities, epsilon, t))
}

#[wasm_bindgen(js_name = ceilingCurve)]
pub fn ceiling_curve_js(n: u32, k: u32, t: u32, c_values: Vec<f64>, eps_max: f64, points: usize) -> Result<String, JsError> {
    to_js(ceiling_curve(n, k, t, &c_values, eps_max, points))
}

#[wasm_bindgen(js_name = twoNodeCurve)]
pub fn two_node_curve_js(max_gap: f64, points: usize) -> Result<String, JsError> {
    to_js(two_node_curve(max_gap, points))
}
