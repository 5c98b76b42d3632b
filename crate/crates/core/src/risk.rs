//! Exact componentwise and integrated risk formulas for ridge, lasso,
//! and pretest, oracle-λ selectors, a quadrature cross-check, and the
//! compound-risk decomposition into irreducible risk plus L² distance
//! to the optimal shrinkage function.

use crate::estimators::{discrete_oracle_m, DiscreteSupport, Kind, SpikeNormal};
use crate::numerics::{
    gauss_hermite, minimize_scalar, std_normal_cdf, std_normal_pdf, NumericsError, RegParam,
};
use rayon::prelude::*;
use thiserror::Error;

pub const DEFAULT_GRID: usize = 1001;
pub const DEFAULT_REFINE_TOL: f64 = 1e-6;

/// λ-grid of criterion values, one column per estimator label.
#[derive(Debug, Clone)]
pub struct RiskCurve {
    pub lambdas: Vec<RegParam>,
    pub labels: Vec<String>,
    /// values[i][j] is the criterion for lambdas[i], labels[j]; NaN for
    /// absent estimators
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum RiskError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("adaptive integration failed to reach relative tolerance {tol}")]
    IntegrationFailure { tol: f64 },
}

/// Componentwise risk of ridge: (1/(1+λ))²σ² + (λ/(1+λ))²μ².
pub fn cw_risk_ridge(mu: f64, sigma: f64, lambda: RegParam) -> f64 {
    if lambda.is_infinite() {
        return mu * mu;
    }
    let a = 1.0 / (1.0 + lambda.lambda());
    a * a * sigma * sigma + (1.0 - a) * (1.0 - a) * mu * mu
}

/// Componentwise risk of lasso under normal X.
pub fn cw_risk_lasso(mu: f64, sigma: f64, lambda: RegParam) -> f64 {
    if lambda.is_infinite() {
        return mu * mu;
    }
    let l = lambda.lambda();
    let lo = (-l - mu) / sigma;
    let hi = (l - mu) / sigma;
    let s2 = sigma * sigma;
    let r = (1.0 + std_normal_cdf(lo) - std_normal_cdf(hi)) * (s2 + l * l)
        + (lo * std_normal_pdf(hi) + (-l + mu) / sigma * std_normal_pdf(lo)) * s2
        + (std_normal_cdf(hi) - std_normal_cdf(lo)) * mu * mu;
    // the displays cancel to O(1e-17) negatives in degenerate corners
    r.max(0.0)
}

/// Componentwise risk of pretest under normal X.
pub fn cw_risk_pretest(mu: f64, sigma: f64, lambda: RegParam) -> f64 {
    if lambda.is_infinite() {
        return mu * mu;
    }
    let l = lambda.lambda();
    let lo = (-l - mu) / sigma;
    let hi = (l - mu) / sigma;
    let s2 = sigma * sigma;
    let r = (1.0 + std_normal_cdf(lo) - std_normal_cdf(hi)) * s2
        + (hi * std_normal_pdf(hi) - lo * std_normal_pdf(lo)) * s2
        + (std_normal_cdf(hi) - std_normal_cdf(lo)) * mu * mu;
    r.max(0.0)
}

pub fn cw_risk(kind: Kind, mu: f64, sigma: f64, lambda: RegParam) -> f64 {
    match kind {
        Kind::Ridge => cw_risk_ridge(mu, sigma, lambda),
        Kind::Lasso => cw_risk_lasso(mu, sigma, lambda),
        Kind::Pretest => cw_risk_pretest(mu, sigma, lambda),
    }
}

/// Integrated (empirical Bayes) risk under the spike-and-normal process.
pub fn int_risk(dgp: &SpikeNormal, kind: Kind, lambda: RegParam) -> f64 {
    let sigma = dgp.sigma;
    let second_moment = dgp.mu0 * dgp.mu0 + dgp.sigma0 * dgp.sigma0;
    if lambda.is_infinite() {
        // full shrinkage: risk is the prior second moment of mu
        return (1.0 - dgp.p) * second_moment;
    }
    let l = lambda.lambda();
    match kind {
        Kind::Ridge => {
            let a = 1.0 / (1.0 + l);
            a * a * sigma * sigma + (1.0 - dgp.p) * (1.0 - a) * (1.0 - a) * second_moment
        }
        Kind::Lasso => {
            let s2 = sigma * sigma;
            let r0 = 2.0 * std_normal_cdf(-l / sigma) * (s2 + l * l)
                - 2.0 * (l / sigma) * std_normal_pdf(l / sigma) * s2;
            let w = dgp.slab_sd();
            let lo = (-l - dgp.mu0) / w;
            let hi = (l - dgp.mu0) / w;
            let r1 = (1.0 + std_normal_cdf(lo) - std_normal_cdf(hi)) * (s2 + l * l)
                + (std_normal_cdf(hi) - std_normal_cdf(lo)) * second_moment
                - w * std_normal_pdf(hi) * (l + dgp.mu0)
                - w * std_normal_pdf(lo) * (l - dgp.mu0);
            dgp.p * r0 + (1.0 - dgp.p) * r1
        }
        Kind::Pretest => {
            let s2 = sigma * sigma;
            let r0 = 2.0 * std_normal_cdf(-l / sigma) * s2
                + 2.0 * (l / sigma) * std_normal_pdf(l / sigma) * s2;
            let w = dgp.slab_sd();
            let w2 = w * w;
            let s02 = dgp.sigma0 * dgp.sigma0;
            let lo = (-l - dgp.mu0) / w;
            let hi = (l - dgp.mu0) / w;
            let r1 = (1.0 + std_normal_cdf(lo) - std_normal_cdf(hi)) * s2
                + (std_normal_cdf(hi) - std_normal_cdf(lo)) * second_moment
                - std_normal_pdf(hi) / w * (l * (s02 - s2) + dgp.mu0 * w2)
                - std_normal_pdf(lo) / w * (l * (s02 - s2) - dgp.mu0 * w2);
            dgp.p * r0 + (1.0 - dgp.p) * r1
        }
    }
    .max(0.0)
}

/// Closed-form oracle λ for ridge: σ²/((1−p)(μ₀²+σ₀²)); ∞ when the
/// slab second moment vanishes.
pub fn ridge_oracle_lambda(dgp: &SpikeNormal) -> RegParam {
    let s = (1.0 - dgp.p) * (dgp.mu0 * dgp.mu0 + dgp.sigma0 * dgp.sigma0);
    if s <= 0.0 {
        RegParam::INFINITE
    } else {
        RegParam::from_lambda(dgp.sigma * dgp.sigma / s)
    }
}

/// Oracle selector: minimize integrated risk over λ ∈ [0, ∞].
pub fn oracle_lambda(dgp: &SpikeNormal, kind: Kind) -> Result<(RegParam, f64), RiskError> {
    let (l, v) = minimize_scalar(
        |lam| int_risk(dgp, kind, lam),
        DEFAULT_GRID,
        DEFAULT_REFINE_TOL,
    )?;
    Ok((l, v))
}

/// Compound risk: componentwise risk averaged over the empirical
/// distribution of the means.
pub fn compound_risk(support: &DiscreteSupport, sigma: f64, kind: Kind, lambda: RegParam) -> f64 {
    let vals = support.values();
    vals.iter().map(|&mu| cw_risk(kind, mu, sigma, lambda)).sum::<f64>() / vals.len() as f64
}

/// Gauss-Hermite + spike quadrature oracle for the integrated-risk
/// displays: p·cw(0) + (1−p)·E[cw(μ)] with μ ~ N(μ₀, σ₀²).
pub fn int_risk_quadrature(
    dgp: &SpikeNormal,
    kind: Kind,
    lambda: RegParam,
    nodes: usize,
) -> Result<f64, RiskError> {
    let spike = cw_risk(kind, 0.0, dgp.sigma, lambda);
    let slab = if dgp.sigma0 == 0.0 {
        cw_risk(kind, dgp.mu0, dgp.sigma, lambda)
    } else {
        let (xs, ws) = gauss_hermite(nodes)?;
        let norm = std::f64::consts::PI.sqrt();
        xs.iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                let mu = dgp.mu0 + std::f64::consts::SQRT_2 * dgp.sigma0 * x;
                w * cw_risk(kind, mu, dgp.sigma, lambda)
            })
            .sum::<f64>()
            / norm
    };
    Ok(dgp.p * spike + (1.0 - dgp.p) * slab)
}

/// Posterior mean for a discrete support under noise sd σ.
fn m_star(x: f64, support: &DiscreteSupport, sigma: f64) -> f64 {
    let scaled = DiscreteSupport::new(support.values().iter().map(|v| v / sigma).collect());
    sigma * discrete_oracle_m(x / sigma, &scaled)
}

/// Adaptive Simpson quadrature with breakpoint splitting.
fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, RiskError>
where
    F: Fn(f64) -> f64,
{
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64, RiskError> {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        // interval no longer bisectable in floating point: accept
        if !(a < m && m < b) {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(RiskError::IntegrationFailure { tol });
        }
        Ok(recurse(f, a, m, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, right, 0.5 * tol, depth - 1)?)
    }
    let m = 0.5 * (a + b);
    let whole = simpson(f, a, m, b);
    recurse(f, a, b, whole, tol, 48)
}

/// Integrate f against the n-component normal mixture implied by the
/// support, splitting panels at the given interior breakpoints.
fn mixture_integral<F>(
    f: F,
    support: &DiscreteSupport,
    sigma: f64,
    breakpoints: &[f64],
) -> Result<f64, RiskError>
where
    F: Fn(f64) -> f64,
{
    let vals = support.values();
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min) - 12.0 * sigma;
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 12.0 * sigma;
    let n = vals.len() as f64;
    let density = move |x: f64| {
        vals.iter().map(|&mu| std_normal_pdf((x - mu) / sigma) / sigma).sum::<f64>() / n
    };
    let integrand = |x: f64| density(x) * f(x);

    let mut cuts = vec![lo];
    for &b in breakpoints {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.push(hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        // nudge shared endpoints one float inward so a jump of the
        // integrand exactly at a breakpoint is evaluated one-sided
        total += adaptive_simpson(&integrand, w[0].next_up(), w[1].next_down(), 1e-11)?;
    }
    Ok(total)
}

/// Compound risk split into irreducible risk v* plus the L² distance of
/// m(·, λ) to the optimal shrinkage function: lhs = v_star + l2_term.
pub fn theorem1_decomposition(
    support: &DiscreteSupport,
    sigma: f64,
    kind: Kind,
    lambda: RegParam,
) -> Result<(f64, f64, f64), RiskError> {
    let lhs = compound_risk(support, sigma, kind, lambda);

    let vals = support.values();
    let n = vals.len() as f64;
    // v* = E[(m*(X) - mu)^2], averaged over the mixture components
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min) - 12.0 * sigma;
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 12.0 * sigma;
    let mut v_star = 0.0;
    for &mu in vals {
        let g = |x: f64| {
            let d = m_star(x, support, sigma) - mu;
            std_normal_pdf((x - mu) / sigma) / sigma * d * d
        };
        v_star += adaptive_simpson(&g, lo, hi, 1e-11)? / n;
    }

    let breaks: Vec<f64> = if lambda.is_infinite() || matches!(kind, Kind::Ridge) {
        vec![]
    } else {
        vec![-lambda.lambda(), lambda.lambda()]
    };
    let l2_term = mixture_integral(
        |x| {
            let d = kind.m(x, lambda) - m_star(x, support, sigma);
            d * d
        },
        support,
        sigma,
        &breaks,
    )?;

    Ok((lhs, v_star, l2_term))
}

/// Risk of the oracle that knows which means are exactly zero: 1 − p in
/// the studentized (σ = 1) setting.
pub fn oracle_zeros_risk(dgp: &SpikeNormal) -> f64 {
    assert!(
        (dgp.sigma - 1.0).abs() < 1e-12,
        "oracle-zeros benchmark is defined for sigma = 1"
    );
    1.0 - dgp.p
}

/// One cell of the minimal-risk surface.
#[derive(Debug, Clone)]
pub struct SurfaceRow {
    pub dgp: SpikeNormal,
    pub risk: [f64; 3],
    pub lambda: [RegParam; 3],
    /// argmin estimator; ties break in ridge < lasso < pretest order
    pub best: Kind,
}

#[derive(Debug, Clone)]
pub struct RiskSurface {
    pub rows: Vec<SurfaceRow>,
}

/// Oracle-minimal risk per estimator over a dgp grid, parallel over
/// cells with deterministic output order.
pub fn risk_surface(grid: &[SpikeNormal]) -> Result<RiskSurface, RiskError> {
    assert!(!grid.is_empty(), "grid must be nonempty");
    let rows = grid
        .par_iter()
        .map(|dgp| {
            let mut risk = [0.0; 3];
            let mut lambda = [RegParam::ZERO; 3];
            for (i, kind) in Kind::ALL.iter().enumerate() {
                let (l, v) = oracle_lambda(dgp, *kind)?;
                risk[i] = v;
                lambda[i] = l;
            }
            let mut best = Kind::Ridge;
            let mut best_v = risk[0];
            for (i, kind) in Kind::ALL.iter().enumerate().skip(1) {
                if risk[i] < best_v {
                    best_v = risk[i];
                    best = *kind;
                }
            }
            Ok(SurfaceRow { dgp: *dgp, risk, lambda, best })
        })
        .collect::<Result<Vec<_>, RiskError>>()?;
    Ok(RiskSurface { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lam(l: f64) -> RegParam {
        RegParam::from_lambda(l)
    }

    #[test]
    fn ridge_cw_examples() {
        assert_abs_diff_eq!(cw_risk_ridge(0.0, 2.0_f64.sqrt(), lam(1.0)), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(cw_risk_ridge(3.0, 1.7, lam(0.0)), 1.7 * 1.7, epsilon = 1e-14);
        assert_eq!(cw_risk_ridge(4.0, 1.0, RegParam::INFINITE), 16.0);
    }

    #[test]
    fn lasso_cw_limits() {
        for &mu in &[0.0, 1.0, -2.5] {
            assert_abs_diff_eq!(cw_risk_lasso(mu, 1.3, lam(0.0)), 1.69, epsilon = 1e-12);
        }
        // mu -> infinity limit is sigma^2 + lambda^2
        let far = cw_risk_lasso(1e4, 1.0, lam(2.0));
        assert_abs_diff_eq!(far, 1.0 + 4.0, epsilon = 1e-9);
        assert_eq!(cw_risk_lasso(3.0, 1.0, RegParam::INFINITE), 9.0);
    }

    #[test]
    fn pretest_cw_limits() {
        assert_abs_diff_eq!(cw_risk_pretest(2.0, 1.5, lam(0.0)), 2.25, epsilon = 1e-12);
        assert_eq!(cw_risk_pretest(4.0, 1.0, RegParam::INFINITE), 16.0);
    }

    #[test]
    fn risk_is_even_in_mu() {
        for kind in Kind::ALL {
            for &mu in &[0.5, 1.0, 3.0, 7.0] {
                for &l in &[0.5, 2.0, 4.0] {
                    let a = cw_risk(kind, mu, 1.0, lam(l));
                    let b = cw_risk(kind, -mu, 1.0, lam(l));
                    assert_abs_diff_eq!(a, b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn int_risk_reduces_to_mle_at_zero() {
        let dgp = SpikeNormal::new(0.4, 2.0, 3.0, 1.5);
        for kind in Kind::ALL {
            assert_abs_diff_eq!(int_risk(&dgp, kind, lam(0.0)), 2.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn ridge_oracle_closed_form() {
        let dgp = SpikeNormal::new(0.0, 0.0, 1.0, 1.0);
        assert_abs_diff_eq!(ridge_oracle_lambda(&dgp).lambda(), 1.0, epsilon = 1e-14);
        let degenerate = SpikeNormal::new(1.0, 2.0, 1.0, 1.0);
        assert!(ridge_oracle_lambda(&degenerate).is_infinite());

        // minimal ridge risk equals sigma^2 s / (sigma^2 + s)
        let d = SpikeNormal::new(0.3, 1.5, 2.0, 1.0);
        let s = (1.0 - d.p) * (d.mu0 * d.mu0 + d.sigma0 * d.sigma0);
        let at_oracle = int_risk(&d, Kind::Ridge, ridge_oracle_lambda(&d));
        assert_abs_diff_eq!(at_oracle, s / (1.0 + s), epsilon = 1e-12);

        // numeric minimizer agrees in t
        let (num, _) = oracle_lambda(&d, Kind::Ridge).unwrap();
        assert!((num.t() - ridge_oracle_lambda(&d).t()).abs() < 1e-4);
    }

    #[test]
    fn appendix_b_pretest_contradiction() {
        // (p, mu0, sigma0, sigma) = (0.5, sqrt 2, 0, 1): minimum risk is
        // exactly 1, attained at both lambda = 0 and lambda = infinity
        let dgp = SpikeNormal::new(0.5, 2.0_f64.sqrt(), 0.0, 1.0);
        let (_, v) = oracle_lambda(&dgp, Kind::Pretest).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(int_risk(&dgp, Kind::Pretest, lam(0.0)), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            int_risk(&dgp, Kind::Pretest, RegParam::INFINITE),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(oracle_zeros_risk(&dgp), 0.5);

        // opposite direction for |mu0| < 1
        let dgp2 = SpikeNormal::new(0.5, 0.9, 0.0, 1.0);
        let (_, v2) = oracle_lambda(&dgp2, Kind::Pretest).unwrap();
        assert!(v2 < 0.5, "oracle pretest risk {v2} should undercut 0.5");
    }

    #[test]
    fn oracle_dominates_endpoints() {
        let dgp = SpikeNormal::new(0.25, 2.0, 2.0, 1.0);
        for kind in Kind::ALL {
            let (_, v) = oracle_lambda(&dgp, kind).unwrap();
            assert!(v <= int_risk(&dgp, kind, lam(0.0)) + 1e-12);
            assert!(v <= int_risk(&dgp, kind, RegParam::INFINITE) + 1e-12);
            assert!(v <= dgp.sigma * dgp.sigma + 1e-12);
        }
    }

    #[test]
    fn compound_risk_basics() {
        let one = DiscreteSupport::new(vec![2.0]);
        assert_abs_diff_eq!(
            compound_risk(&one, 1.0, Kind::Lasso, lam(1.0)),
            cw_risk_lasso(2.0, 1.0, lam(1.0)),
            epsilon = 1e-14
        );
        let pair = DiscreteSupport::new(vec![-2.0, 2.0]);
        assert_abs_diff_eq!(
            compound_risk(&pair, 1.0, Kind::Pretest, lam(1.0)),
            cw_risk_pretest(2.0, 1.0, lam(1.0)),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(compound_risk(&pair, 1.3, Kind::Ridge, lam(0.0)), 1.69, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_oracle_agrees() {
        let lambdas = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
        for &p in &[0.0, 0.5, 0.95] {
            for &mu0 in &[0.0, 2.0, 4.0] {
                for &s0 in &[2.0, 6.0] {
                    let dgp = SpikeNormal::new(p, mu0, s0, 1.0);
                    for kind in Kind::ALL {
                        for &l in &lambdas {
                            let a = int_risk(&dgp, kind, lam(l));
                            // σ₀ = 6 spreads mass far beyond the unit-scale
                            // features of the risk function, so the rule
                            // needs its full 256 nodes for 1e-6 agreement
                            let q = int_risk_quadrature(&dgp, kind, lam(l), 256).unwrap();
                            assert!(
                                (a - q).abs() / q.abs().max(1e-12) < 1e-6,
                                "{kind:?} p={p} mu0={mu0} s0={s0} l={l}: {a} vs {q}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn quadrature_degenerate_cases() {
        let point = SpikeNormal::new(0.5, 2.0, 0.0, 1.0);
        let q = int_risk_quadrature(&point, Kind::Lasso, lam(1.0), 128).unwrap();
        let direct = 0.5 * cw_risk_lasso(0.0, 1.0, lam(1.0)) + 0.5 * cw_risk_lasso(2.0, 1.0, lam(1.0));
        assert_abs_diff_eq!(q, direct, epsilon = 1e-14);

        let all_spike = SpikeNormal::new(1.0, 2.0, 2.0, 1.0);
        let q2 = int_risk_quadrature(&all_spike, Kind::Pretest, lam(1.0), 128).unwrap();
        assert_abs_diff_eq!(q2, cw_risk_pretest(0.0, 1.0, lam(1.0)), epsilon = 1e-14);
    }

    #[test]
    fn decomposition_identity_case() {
        // support {0}, lambda = 0: m* is identically 0, m(x) = x
        let s = DiscreteSupport::new(vec![0.0]);
        let (lhs, v, l2) = theorem1_decomposition(&s, 1.0, Kind::Ridge, lam(0.0)).unwrap();
        assert_abs_diff_eq!(lhs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(l2, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn decomposition_two_point_support() {
        let s = DiscreteSupport::new(vec![-2.0, 2.0]);
        for kind in Kind::ALL {
            let (lhs, v, l2) = theorem1_decomposition(&s, 1.0, kind, lam(1.0)).unwrap();
            assert!(l2 >= 0.0 && lhs >= v - 1e-9);
            assert!(
                (lhs - (v + l2)).abs() <= 1e-6,
                "{kind:?}: lhs = {lhs}, v* + l2 = {}",
                v + l2
            );
        }
    }

    #[test]
    fn surface_qualitative_regions() {
        // p = 0: ridge is best everywhere on the coarse grid
        let mut grid = Vec::new();
        for &mu0 in &[0.0, 2.0, 4.0] {
            for &s0 in &[2.0, 4.0, 6.0] {
                grid.push(SpikeNormal::new(0.0, mu0, s0, 1.0));
            }
        }
        // separated case favors pretest; intermediate favors lasso
        grid.push(SpikeNormal::new(0.75, 4.0, 2.0, 1.0));
        grid.push(SpikeNormal::new(0.75, 2.0, 2.0, 1.0));
        let surface = risk_surface(&grid).unwrap();
        for row in &surface.rows[..9] {
            assert_eq!(row.best, Kind::Ridge, "at {:?}", row.dgp);
        }
        assert_eq!(surface.rows[9].best, Kind::Pretest);
        assert_eq!(surface.rows[10].best, Kind::Lasso);
    }
}
