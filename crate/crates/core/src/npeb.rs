//! Nonparametric empirical-Bayes estimation: a discrete-support
//! mixture fitted by EM under standard normal noise, evaluated through
//! the posterior-mean shrinkage rule.

use crate::numerics::std_normal_log_pdf;
use crate::sure::Sample;

pub const DEFAULT_GRID_SIZE: usize = 300;
pub const DEFAULT_MAX_ITER: usize = 2000;
pub const DEFAULT_TOL: f64 = 1e-8;

/// A discrete prior estimate: support grid, simplex weights, and the
/// attained marginal log-likelihood.
#[derive(Debug, Clone)]
pub struct DiscreteMixture {
    support: Vec<f64>,
    weights: Vec<f64>,
    loglik: f64,
}

impl DiscreteMixture {
    pub fn new(support: Vec<f64>, weights: Vec<f64>, loglik: f64) -> Self {
        assert_eq!(support.len(), weights.len());
        assert!(support.windows(2).all(|w| w[0] < w[1]), "support must be strictly increasing");
        let total: f64 = weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "weights must sum to 1, got {total}");
        assert!(weights.iter().all(|&w| w >= 0.0));
        DiscreteMixture { support, weights, loglik }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    /// Posterior mean Σ uⱼwⱼφ(x−uⱼ) / Σ wⱼφ(x−uⱼ), computed in log
    /// space; saturates to the nearest support point if every weighted
    /// density underflows.
    pub fn posterior_mean(&self, x: f64) -> f64 {
        let mut max_log = f64::NEG_INFINITY;
        for (&u, &w) in self.support.iter().zip(&self.weights) {
            if w > 0.0 {
                max_log = max_log.max(w.ln() + std_normal_log_pdf(x - u));
            }
        }
        if max_log == f64::NEG_INFINITY {
            return self.nearest_support(x);
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (&u, &w) in self.support.iter().zip(&self.weights) {
            if w > 0.0 {
                let r = (w.ln() + std_normal_log_pdf(x - u) - max_log).exp();
                num += u * r;
                den += r;
            }
        }
        num / den
    }

    fn nearest_support(&self, x: f64) -> f64 {
        let mut best = self.support[0];
        for (&u, &w) in self.support.iter().zip(&self.weights) {
            if w > 0.0 && (u - x).abs() < (best - x).abs() {
                best = u;
            }
        }
        best
    }

    /// Marginal density of X under the fitted mixture.
    pub fn marginal(&self, x: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * (std_normal_log_pdf(x - u)).exp())
            .sum()
    }

    /// Analytic ∇ log of the fitted marginal.
    pub fn log_marginal_gradient(&self, x: f64) -> f64 {
        let mut f = 0.0;
        let mut df = 0.0;
        for (&u, &w) in self.support.iter().zip(&self.weights) {
            let d = w * std_normal_log_pdf(x - u).exp();
            f += d;
            df += d * (u - x);
        }
        df / f
    }
}

/// Per-iteration log-likelihood trace of an EM fit; monotone
/// nondecreasing by construction, asserted in tests.
#[derive(Debug, Clone)]
pub struct EmFit {
    pub mixture: DiscreteMixture,
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
}

/// Fit a discrete mixture prior by EM on an equispaced grid over
/// [min X − 1, max X + 1], starting from uniform weights. Stops when
/// the relative log-likelihood change falls below `tol` or at
/// `max_iter`.
pub fn fit_em(sample: &Sample, grid_size: usize, max_iter: usize, tol: f64) -> EmFit {
    assert!(grid_size >= 2, "grid_size must be >= 2");
    let xs = sample.values();
    let n = xs.len();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let g = grid_size;
    let support: Vec<f64> =
        (0..g).map(|j| lo + (hi - lo) * j as f64 / (g - 1) as f64).collect();

    // precompute component log-densities once
    let log_dens: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| support.iter().map(|&u| std_normal_log_pdf(x - u)).collect())
        .collect();

    let mut weights = vec![1.0 / g as f64; g];
    let mut trace = Vec::new();
    let mut loglik = f64::NEG_INFINITY;
    let mut iterations = 0;

    for iter in 0..max_iter {
        // E-step: responsibilities, accumulated straight into the new weights
        let mut new_weights = vec![0.0; g];
        let mut ll = 0.0;
        for ld in &log_dens {
            let mut max_log = f64::NEG_INFINITY;
            for j in 0..g {
                if weights[j] > 0.0 {
                    max_log = max_log.max(weights[j].ln() + ld[j]);
                }
            }
            let mut den = 0.0;
            let mut resp = vec![0.0; g];
            for j in 0..g {
                if weights[j] > 0.0 {
                    let r = (weights[j].ln() + ld[j] - max_log).exp();
                    resp[j] = r;
                    den += r;
                }
            }
            ll += max_log + den.ln();
            for j in 0..g {
                new_weights[j] += resp[j] / den;
            }
        }
        // M-step
        for w in &mut new_weights {
            *w /= n as f64;
        }
        let total: f64 = new_weights.iter().sum();
        for w in &mut new_weights {
            *w /= total;
        }
        weights = new_weights;
        trace.push(ll);
        iterations = iter + 1;
        if loglik.is_finite() && (ll - loglik).abs() / loglik.abs().max(1.0) < tol {
            loglik = ll;
            break;
        }
        loglik = ll;
    }

    EmFit {
        mixture: DiscreteMixture::new(support, weights, loglik),
        loglik_trace: trace,
        iterations,
    }
}

/// Fit with the default grid and stopping rule.
pub fn fit_em_default(sample: &Sample) -> EmFit {
    fit_em(sample, DEFAULT_GRID_SIZE, DEFAULT_MAX_ITER, DEFAULT_TOL)
}

/// Posterior-mean shrinkage rule of a fitted mixture.
pub fn npeb_m(mix: &DiscreteMixture, x: f64) -> f64 {
    mix.posterior_mean(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::tweedie_m;
    use approx::assert_abs_diff_eq;

    #[test]
    fn degenerate_sample_concentrates() {
        let sample = Sample::new(vec![3.0; 50]);
        let fit = fit_em(&sample, 41, 500, 1e-10);
        let spacing = 2.0 / 40.0;
        let m_hat = fit.mixture.posterior_mean(3.0);
        assert!((m_hat - 3.0).abs() <= spacing, "m_hat = {m_hat}");
    }

    #[test]
    fn symmetric_sample_symmetric_rule() {
        let mut xs = Vec::new();
        for i in 1..=25 {
            let v = i as f64 / 5.0;
            xs.push(v);
            xs.push(-v);
        }
        let fit = fit_em(&sample_of(xs), 101, 500, 1e-10);
        assert_abs_diff_eq!(fit.mixture.posterior_mean(0.0), 0.0, epsilon = 1e-8);
    }

    fn sample_of(xs: Vec<f64>) -> Sample {
        Sample::new(xs)
    }

    #[test]
    fn loglik_monotone_and_simplex_preserved() {
        let xs: Vec<f64> = (0..80).map(|i| ((i * 31) % 23) as f64 / 3.0 - 3.5).collect();
        let fit = fit_em(&sample_of(xs), 60, 300, 1e-12);
        for w in fit.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "log-likelihood dropped: {} -> {}", w[0], w[1]);
        }
        let total: f64 = fit.mixture.weights().iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn posterior_mean_atoms() {
        let single = DiscreteMixture::new(vec![2.0, 5.0], vec![1.0, 0.0], 0.0);
        assert_eq!(single.posterior_mean(-10.0), 2.0);
        assert_eq!(single.posterior_mean(40.0), 2.0);

        let pair = DiscreteMixture::new(vec![-1.5, 1.5], vec![0.5, 0.5], 0.0);
        assert_abs_diff_eq!(pair.posterior_mean(0.0), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn posterior_mean_equals_tweedie() {
        let mix = DiscreteMixture::new(
            vec![-2.0, -0.5, 0.0, 1.0, 3.0],
            vec![0.1, 0.2, 0.4, 0.2, 0.1],
            0.0,
        );
        for i in -50..=50 {
            let x = i as f64 / 5.0;
            let direct = mix.posterior_mean(x);
            let tweedie = tweedie_m(x, |y| mix.log_marginal_gradient(y));
            assert_abs_diff_eq!(direct, tweedie, epsilon = 1e-8);
        }
    }

    #[test]
    fn posterior_mean_saturates_far_out() {
        let mix = DiscreteMixture::new(vec![-1.0, 0.0, 1.0], vec![0.3, 0.4, 0.3], 0.0);
        let m = mix.posterior_mean(1e8);
        assert_eq!(m, 1.0);
        assert!(mix.posterior_mean(-1e8) == -1.0);
    }
}
