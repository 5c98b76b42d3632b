//! Browser bindings for the demo page: three interactive views onto the
//! shrinkage library. Each export takes plain scalars, runs the exact
//! risk formulas, and returns a JSON string the page renders on a
//! canvas. All computation happens client-side; nothing is approximate
//! beyond the formulas themselves.

use manymeans::estimators::{spike_normal_optimal_m, Kind};
use manymeans::numerics::RegParam;
use manymeans::risk::{int_risk, oracle_lambda};
use manymeans::SpikeNormal;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Curve {
    label: String,
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Serialize)]
struct CurveSet {
    x_label: String,
    y_label: String,
    curves: Vec<Curve>,
}

fn dgp(p: f64, mu0: f64, sigma0: f64) -> Result<SpikeNormal, String> {
    if !(0.0..=1.0).contains(&p) {
        return Err("p must lie in [0, 1]".to_string());
    }
    if !(mu0.is_finite() && sigma0.is_finite() && sigma0 >= 0.0) {
        return Err("mu0 must be finite and sigma0 nonnegative".to_string());
    }
    Ok(SpikeNormal::new(p, mu0, sigma0, 1.0))
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Integrated risk of ridge/lasso/pretest versus the compact
/// regularization coordinate t = λ/(1+λ), for one spike-normal
/// population. Returns JSON: {x_label, y_label, curves: [{label, x, y}]}.
#[wasm_bindgen]
pub fn risk_curves(p: f64, mu0: f64, sigma0: f64, points: usize) -> Result<String, JsError> {
    risk_curves_impl(p, mu0, sigma0, points).map_err(|e| JsError::new(&e))
}

fn risk_curves_impl(p: f64, mu0: f64, sigma0: f64, points: usize) -> Result<String, String> {
    let dgp = dgp(p, mu0, sigma0)?;
    let n = points.clamp(16, 4096);
    let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let curves = Kind::ALL
        .iter()
        .map(|kind| Curve {
            label: kind.label().to_string(),
            x: ts.clone(),
            y: ts.iter().map(|&t| int_risk(&dgp, *kind, RegParam::from_t(t))).collect(),
        })
        .collect();
    to_json(&CurveSet {
        x_label: "t = lambda / (1 + lambda)".to_string(),
        y_label: "integrated risk".to_string(),
        curves,
    })
}

#[derive(Serialize)]
struct Surface {
    mu0: Vec<f64>,
    sigma0: Vec<f64>,
    /// best[i][j] holds the winner at (sigma0[i], mu0[j])
    best: Vec<Vec<String>>,
    risk: Vec<Vec<f64>>,
}

/// Best estimator (minimal oracle risk among ridge/lasso/pretest) over a
/// (μ₀, σ₀) grid at fixed spike probability p. Returns JSON:
/// {mu0, sigma0, best, risk} with row-major [σ₀][μ₀] layout.
#[wasm_bindgen]
pub fn best_surface(
    p: f64,
    mu0_max: f64,
    sigma0_max: f64,
    steps: usize,
) -> Result<String, JsError> {
    best_surface_impl(p, mu0_max, sigma0_max, steps).map_err(|e| JsError::new(&e))
}

fn best_surface_impl(
    p: f64,
    mu0_max: f64,
    sigma0_max: f64,
    steps: usize,
) -> Result<String, String> {
    if !(mu0_max > 0.0 && sigma0_max > 0.0) {
        return Err("grid extents must be positive".to_string());
    }
    let n = steps.clamp(2, 64);
    let mu0s: Vec<f64> = (0..n).map(|i| mu0_max * i as f64 / (n - 1) as f64).collect();
    let s0s: Vec<f64> = (0..n).map(|i| sigma0_max * i as f64 / (n - 1) as f64).collect();
    let mut best = Vec::with_capacity(n);
    let mut risk = Vec::with_capacity(n);
    for &s0 in &s0s {
        let mut best_row = Vec::with_capacity(n);
        let mut risk_row = Vec::with_capacity(n);
        for &mu0 in &mu0s {
            let dgp = dgp(p, mu0, s0)?;
            let mut winner = Kind::Ridge;
            let mut min_risk = f64::INFINITY;
            for kind in Kind::ALL {
                let (_, r) = oracle_lambda(&dgp, kind).map_err(|e| e.to_string())?;
                if r < min_risk {
                    min_risk = r;
                    winner = kind;
                }
            }
            best_row.push(winner.label().to_string());
            risk_row.push(min_risk);
        }
        best.push(best_row);
        risk.push(risk_row);
    }
    to_json(&Surface { mu0: mu0s, sigma0: s0s, best, risk })
}

/// The three shrinkage functions m(x, λ) at a common λ, plus the optimal
/// shrinkage function of a spike-normal population, on x ∈ [−x_max, x_max].
/// Returns the same JSON shape as `risk_curves`.
#[wasm_bindgen]
pub fn shrinkage_functions(
    lambda: f64,
    p: f64,
    mu0: f64,
    sigma0: f64,
    x_max: f64,
    points: usize,
) -> Result<String, JsError> {
    shrinkage_functions_impl(lambda, p, mu0, sigma0, x_max, points)
        .map_err(|e| JsError::new(&e))
}

fn shrinkage_functions_impl(
    lambda: f64,
    p: f64,
    mu0: f64,
    sigma0: f64,
    x_max: f64,
    points: usize,
) -> Result<String, String> {
    if !(lambda >= 0.0) {
        return Err("lambda must be nonnegative".to_string());
    }
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err("x_max must be positive and finite".to_string());
    }
    let dgp = dgp(p, mu0, sigma0)?;
    let l = RegParam::from_lambda(lambda);
    let n = points.clamp(16, 4096);
    let xs: Vec<f64> = (0..n).map(|i| -x_max + 2.0 * x_max * i as f64 / (n - 1) as f64).collect();
    let mut curves: Vec<Curve> = Kind::ALL
        .iter()
        .map(|kind| Curve {
            label: kind.label().to_string(),
            x: xs.clone(),
            y: xs.iter().map(|&x| kind.m(x, l)).collect(),
        })
        .collect();
    curves.push(Curve {
        label: "optimal".to_string(),
        x: xs.clone(),
        y: xs.iter().map(|&x| spike_normal_optimal_m(x, &dgp)).collect(),
    });
    to_json(&CurveSet {
        x_label: "x".to_string(),
        y_label: "m(x)".to_string(),
        curves,
    })
}
