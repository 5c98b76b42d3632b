//! Componentwise estimating functions m(x, λ): linear shrinkage (ridge),
//! soft thresholding (lasso), hard thresholding (pretest), and the
//! posterior-mean optimal shrinkage functions they are compared against.

use crate::npeb::DiscreteMixture;
use crate::numerics::{std_normal_log_pdf, std_normal_pdf, RegParam};
use serde::{Deserialize, Serialize};

/// The spike-and-normal data generating process: μ = 0 with probability
/// `p`, otherwise N(μ₀, σ₀²); observation noise is N(0, σ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeNormal {
    pub p: f64,
    pub mu0: f64,
    pub sigma0: f64,
    pub sigma: f64,
}

impl SpikeNormal {
    pub fn new(p: f64, mu0: f64, sigma0: f64, sigma: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
        assert!(sigma0 >= 0.0, "sigma0 must be nonnegative");
        assert!(sigma > 0.0, "sigma must be positive");
        SpikeNormal { p, mu0, sigma0, sigma }
    }

    /// Marginal standard deviation of X for the non-zero component.
    pub fn slab_sd(&self) -> f64 {
        (self.sigma0 * self.sigma0 + self.sigma * self.sigma).sqrt()
    }
}

/// Discrete support μ₁..μₙ in studentized units (σ = 1 implied).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSupport {
    values: Vec<f64>,
}

impl DiscreteSupport {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "support must be nonempty");
        assert!(values.iter().all(|v| v.is_finite()), "support must be finite");
        DiscreteSupport { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The three λ-indexed estimator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Ridge,
    Lasso,
    Pretest,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Ridge, Kind::Lasso, Kind::Pretest];

    pub fn m(&self, x: f64, lambda: RegParam) -> f64 {
        match self {
            Kind::Ridge => ridge_m(x, lambda),
            Kind::Lasso => lasso_m(x, lambda),
            Kind::Pretest => pretest_m(x, lambda),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Kind::Ridge => "ridge",
            Kind::Lasso => "lasso",
            Kind::Pretest => "pretest",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ridge" => Ok(Kind::Ridge),
            "lasso" => Ok(Kind::Lasso),
            "pretest" => Ok(Kind::Pretest),
            other => Err(format!("unknown estimator kind: {other}")),
        }
    }
}

/// Which estimating function to apply, plus its regularization state.
/// λ is ignored by the posterior-mean kinds.
#[derive(Debug, Clone)]
pub enum ShrinkageRule {
    Ridge(RegParam),
    Lasso(RegParam),
    Pretest(RegParam),
    SpikeNormalOptimal(SpikeNormal),
    DiscreteOracle(DiscreteSupport),
    Npeb(DiscreteMixture),
}

impl ShrinkageRule {
    pub fn m(&self, x: f64) -> f64 {
        match self {
            ShrinkageRule::Ridge(l) => ridge_m(x, *l),
            ShrinkageRule::Lasso(l) => lasso_m(x, *l),
            ShrinkageRule::Pretest(l) => pretest_m(x, *l),
            ShrinkageRule::SpikeNormalOptimal(dgp) => spike_normal_optimal_m(x, dgp),
            ShrinkageRule::DiscreteOracle(s) => discrete_oracle_m(x, s),
            ShrinkageRule::Npeb(mix) => mix.posterior_mean(x),
        }
    }
}

/// Linear shrinkage: x/(1+λ).
pub fn ridge_m(x: f64, lambda: RegParam) -> f64 {
    if lambda.is_infinite() {
        0.0
    } else {
        x / (1.0 + lambda.lambda())
    }
}

/// Soft thresholding: sign(x)·max(|x|−λ, 0). Boundary |x| = λ maps to 0.
pub fn lasso_m(x: f64, lambda: RegParam) -> f64 {
    if lambda.is_infinite() {
        return 0.0;
    }
    let l = lambda.lambda();
    if x > l {
        x - l
    } else if x < -l {
        x + l
    } else {
        0.0
    }
}

/// Hard thresholding: 1(|x| > λ)·x. Boundary |x| = λ maps to 0.
pub fn pretest_m(x: f64, lambda: RegParam) -> f64 {
    if lambda.is_infinite() {
        return 0.0;
    }
    if x.abs() > lambda.lambda() {
        x
    } else {
        0.0
    }
}

/// Posterior mean of μ given X = x when μ is uniform on a finite
/// support and the noise is standard normal:
/// m*(x) = Σ μᵢ φ(x − μᵢ) / Σ φ(x − μᵢ).
///
/// When every weight underflows to zero the result saturates to the
/// support value nearest x.
pub fn discrete_oracle_m(x: f64, support: &DiscreteSupport) -> f64 {
    let vals = support.values();
    // log-sum-exp over the support
    let max_log = vals
        .iter()
        .map(|&mu| std_normal_log_pdf(x - mu))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_log == f64::NEG_INFINITY {
        // saturation: all weights underflowed even in log space
        return nearest(vals, x);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &mu in vals {
        let w = (std_normal_log_pdf(x - mu) - max_log).exp();
        num += mu * w;
        den += w;
    }
    num / den
}

fn nearest(vals: &[f64], x: f64) -> f64 {
    let mut best = vals[0];
    for &v in vals {
        if (v - x).abs() < (best - x).abs() {
            best = v;
        }
    }
    best
}

/// The optimal shrinkage function of the spike-and-normal process: the
/// posterior mean of μ given X = x, computed in log space so the
/// spike/slab weight ratio does not underflow for large |x|.
pub fn spike_normal_optimal_m(x: f64, dgp: &SpikeNormal) -> f64 {
    if dgp.p >= 1.0 {
        return 0.0;
    }
    let s = dgp.slab_sd();
    let slab_post =
        (dgp.mu0 * dgp.sigma * dgp.sigma + x * dgp.sigma0 * dgp.sigma0) / (s * s);
    if dgp.p <= 0.0 {
        return slab_post;
    }
    let log_spike = dgp.p.ln() + std_normal_log_pdf(x / dgp.sigma) - dgp.sigma.ln();
    let log_slab = (1.0 - dgp.p).ln() + std_normal_log_pdf((x - dgp.mu0) / s) - s.ln();
    // slab posterior weight = 1 / (1 + exp(log_spike − log_slab))
    let w_slab = 1.0 / (1.0 + (log_spike - log_slab).exp());
    w_slab * slab_post
}

/// Marginal density of X under the spike-and-normal process.
pub fn spike_normal_marginal(x: f64, dgp: &SpikeNormal) -> f64 {
    let s = dgp.slab_sd();
    dgp.p * std_normal_pdf(x / dgp.sigma) / dgp.sigma
        + (1.0 - dgp.p) * std_normal_pdf((x - dgp.mu0) / s) / s
}

/// Analytic ∇ log of the spike-and-normal marginal.
pub fn spike_normal_log_marginal_gradient(x: f64, dgp: &SpikeNormal) -> f64 {
    let s = dgp.slab_sd();
    let spike = dgp.p * std_normal_pdf(x / dgp.sigma) / dgp.sigma;
    let slab = (1.0 - dgp.p) * std_normal_pdf((x - dgp.mu0) / s) / s;
    let d_spike = spike * (-x / (dgp.sigma * dgp.sigma));
    let d_slab = slab * (-(x - dgp.mu0) / (s * s));
    (d_spike + d_slab) / (spike + slab)
}

/// Tweedie's formula: the posterior mean is x + ∇ log f(x) for the
/// marginal density f of X when the noise is standard normal.
pub fn tweedie_m<F>(x: f64, log_density_gradient: F) -> f64
where
    F: Fn(f64) -> f64,
{
    x + log_density_gradient(x)
}

/// Apply a rule elementwise.
pub fn apply_rule(rule: &ShrinkageRule, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| rule.m(x)).collect()
}
