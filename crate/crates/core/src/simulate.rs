//! Seeded spike-and-normal data generation, compound-loss measurement,
//! and the simulation-study runner that compares data-driven selectors
//! across a (p, μ₀, σ₀) × n grid.

use crate::cv::{select_cv, CvCriterion, CvError, PanelSample};
use crate::estimators::{spike_normal_optimal_m, Kind, SpikeNormal};
use crate::npeb::fit_em_default;
use crate::numerics::{RegParam, SeedSpec};
use crate::sure::{Sample, SureCriterion, SureError};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Sure(#[from] SureError),
    #[error(transparent)]
    Cv(#[from] CvError),
}

/// Draw μ₁..μₙ from the spike-and-normal prior.
pub fn draw_means(dgp: &SpikeNormal, n: usize, seed: SeedSpec) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < dgp.p {
                0.0
            } else {
                let z: f64 = rng.sample(StandardNormal);
                dgp.mu0 + dgp.sigma0 * z
            }
        })
        .collect()
}

/// X_i = μ_i + U_i with standard normal noise.
pub fn draw_sample(mus: &[f64], seed: SeedSpec) -> Vec<f64> {
    let mut rng = seed.rng();
    mus.iter().map(|&mu| mu + rng.sample::<f64, _>(StandardNormal)).collect()
}

/// x_ji = μ_i + √k·u_ji, so the k-replicate means X_{ki} have the same
/// distribution as the X_i of `draw_sample`.
pub fn draw_panel(mus: &[f64], k: usize, seed: SeedSpec) -> PanelSample {
    let mut rng = seed.rng();
    let sk = (k as f64).sqrt();
    let rows: Vec<Vec<f64>> = mus
        .iter()
        .map(|&mu| (0..k).map(|_| mu + sk * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    PanelSample::new(rows).expect("k >= 2")
}

/// Compound loss: (1/n) Σ (estimateᵢ − μᵢ)².
pub fn compound_loss(estimates: &[f64], mus: &[f64]) -> f64 {
    assert_eq!(estimates.len(), mus.len(), "length mismatch");
    estimates
        .iter()
        .zip(mus)
        .map(|(&e, &m)| (e - m) * (e - m))
        .sum::<f64>()
        / mus.len() as f64
}

/// One estimator/selector combination measured by the study runner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "selector")]
pub enum StudyEstimator {
    Sure { kind: Kind },
    CvLoo { kind: Kind, k: usize },
    CvHoldout { kind: Kind, k: usize },
    Fixed { kind: Kind, t: f64 },
    Npeb,
}

impl StudyEstimator {
    pub fn estimator_label(&self) -> String {
        match self {
            StudyEstimator::Sure { kind }
            | StudyEstimator::CvLoo { kind, .. }
            | StudyEstimator::CvHoldout { kind, .. }
            | StudyEstimator::Fixed { kind, .. } => kind.label().to_string(),
            StudyEstimator::Npeb => "npeb".to_string(),
        }
    }

    pub fn selector_label(&self) -> String {
        match self {
            StudyEstimator::Sure { .. } => "sure".to_string(),
            StudyEstimator::CvLoo { k, .. } => format!("cv-loo-k{k}"),
            StudyEstimator::CvHoldout { k, .. } => format!("cv-holdout-k{k}"),
            StudyEstimator::Fixed { .. } => "fixed".to_string(),
            StudyEstimator::Npeb => "em".to_string(),
        }
    }
}

/// Study configuration; serializable as the JSON config the CLI reads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub dgps: Vec<SpikeNormal>,
    pub ns: Vec<usize>,
    pub reps: usize,
    pub estimators: Vec<StudyEstimator>,
    pub master_seed: u64,
}

impl SimConfig {
    /// The default simulation grid: p ∈ {0, .25, .5, .75, .95},
    /// μ₀ ∈ {0, 2, 4}, σ₀ ∈ {2, 4, 6}; n ∈ {50, 200, 1000}; SURE
    /// selectors for all three kinds plus leave-one-out CV at k ∈ {4, 20}
    /// and NPEB; 200 replications at desk scale.
    pub fn default_study(master_seed: u64) -> Self {
        let mut dgps = Vec::new();
        for &p in &[0.0, 0.25, 0.5, 0.75, 0.95] {
            for &mu0 in &[0.0, 2.0, 4.0] {
                for &s0 in &[2.0, 4.0, 6.0] {
                    dgps.push(SpikeNormal::new(p, mu0, s0, 1.0));
                }
            }
        }
        let mut estimators = Vec::new();
        for kind in Kind::ALL {
            estimators.push(StudyEstimator::Sure { kind });
            estimators.push(StudyEstimator::CvLoo { kind, k: 4 });
            estimators.push(StudyEstimator::CvLoo { kind, k: 20 });
        }
        estimators.push(StudyEstimator::Npeb);
        SimConfig { dgps, ns: vec![50, 200, 1000], reps: 200, estimators, master_seed }
    }
}

/// Aggregate for one (dgp, n, estimator) cell.
#[derive(Debug, Clone, Serialize)]
pub struct SimCell {
    pub dgp: SpikeNormal,
    pub n: usize,
    pub estimator: String,
    pub selector: String,
    pub mean_loss: f64,
    pub se: f64,
    /// mean selected λ; NaN when any replication selected λ = ∞ or the
    /// estimator has no λ (NPEB)
    pub mean_lambda: f64,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub cells: Vec<SimCell>,
}

impl SimResult {
    pub fn cell(&self, dgp: &SpikeNormal, n: usize, estimator: &str, selector: &str) -> Option<&SimCell> {
        self.cells.iter().find(|c| {
            c.n == n
                && c.estimator == estimator
                && c.selector == selector
                && (c.dgp.p - dgp.p).abs() < 1e-12
                && (c.dgp.mu0 - dgp.mu0).abs() < 1e-12
                && (c.dgp.sigma0 - dgp.sigma0).abs() < 1e-12
        })
    }
}

fn rep_seed(master_seed: u64, cell_idx: usize, rep: usize) -> SeedSpec {
    SeedSpec::new(master_seed, 0)
        .substream(cell_idx as u64)
        .substream(rep as u64)
}

/// One replication of one estimator: returns (loss, selected λ or NaN).
fn run_one(
    est: &StudyEstimator,
    dgp: &SpikeNormal,
    n: usize,
    seed: SeedSpec,
) -> Result<(f64, f64), SimError> {
    let mus = draw_means(dgp, n, seed.substream(0));
    match est {
        StudyEstimator::Sure { kind } => {
            let xs = draw_sample(&mus, seed.substream(1));
            let c = SureCriterion::new(*kind, Sample::new(xs.clone()))?;
            let (lambda, _, _curve) = select_sure_no_curve(&c)?;
            let estimates: Vec<f64> = xs.iter().map(|&x| kind.m(x, lambda)).collect();
            Ok((compound_loss(&estimates, &mus), lambda.lambda()))
        }
        StudyEstimator::Fixed { kind, t } => {
            let xs = draw_sample(&mus, seed.substream(1));
            let lambda = RegParam::from_t(*t);
            let estimates: Vec<f64> = xs.iter().map(|&x| kind.m(x, lambda)).collect();
            Ok((compound_loss(&estimates, &mus), lambda.lambda()))
        }
        StudyEstimator::CvLoo { kind, k } | StudyEstimator::CvHoldout { kind, k } => {
            let panel = draw_panel(&mus, *k, seed.substream(2 + *k as u64));
            let criterion = match est {
                StudyEstimator::CvLoo { .. } => CvCriterion::LeaveOneOut,
                _ => CvCriterion::Holdout,
            };
            let (lambda, estimates) = select_cv(&panel, *kind, criterion)?;
            Ok((compound_loss(&estimates, &mus), lambda.lambda()))
        }
        StudyEstimator::Npeb => {
            let xs = draw_sample(&mus, seed.substream(1));
            let fit = fit_em_default(&Sample::new(xs.clone()));
            let estimates: Vec<f64> = xs.iter().map(|&x| fit.mixture.posterior_mean(x)).collect();
            Ok((compound_loss(&estimates, &mus), f64::NAN))
        }
    }
}

fn select_sure_no_curve(
    c: &SureCriterion,
) -> Result<(RegParam, f64, ()), SureError> {
    use crate::numerics::minimize_scalar;
    use crate::risk::{DEFAULT_GRID, DEFAULT_REFINE_TOL};
    let (l, v) = minimize_scalar(
        |lam| crate::sure::sure_value(c, lam),
        DEFAULT_GRID,
        DEFAULT_REFINE_TOL,
    )?;
    Ok((l, v, ()))
}

/// Run the full study: deterministic given the master seed, regardless
/// of thread count (per-replication streams are derived from the cell
/// and replication indices and aggregated in index order).
pub fn run_study(cfg: &SimConfig) -> Result<SimResult, SimError> {
    assert!(cfg.reps >= 1 && !cfg.dgps.is_empty() && !cfg.ns.is_empty());
    let mut cell_specs = Vec::new();
    let mut cell_idx = 0usize;
    for dgp in &cfg.dgps {
        for &n in &cfg.ns {
            cell_specs.push((cell_idx, *dgp, n));
            cell_idx += 1;
        }
    }

    let mut cells = Vec::new();
    for (idx, dgp, n) in &cell_specs {
        for est in &cfg.estimators {
            let results: Vec<(f64, f64)> = (0..cfg.reps)
                .into_par_iter()
                .map(|rep| run_one(est, dgp, *n, rep_seed(cfg.master_seed, *idx, rep)))
                .collect::<Result<Vec<_>, SimError>>()?;
            let losses: Vec<f64> = results.iter().map(|r| r.0).collect();
            let mean = losses.iter().sum::<f64>() / losses.len() as f64;
            let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>()
                / (losses.len().saturating_sub(1).max(1)) as f64;
            let se = (var / losses.len() as f64).sqrt();
            let lambdas: Vec<f64> = results.iter().map(|r| r.1).collect();
            let mean_lambda = if lambdas.iter().all(|l| l.is_finite()) {
                lambdas.iter().sum::<f64>() / lambdas.len() as f64
            } else {
                f64::NAN
            };
            cells.push(SimCell {
                dgp: *dgp,
                n: *n,
                estimator: est.estimator_label(),
                selector: est.selector_label(),
                mean_loss: mean,
                se,
                mean_lambda,
            });
        }
    }
    Ok(SimResult { cells })
}

/// Monte Carlo risk of the optimal shrinkage function m̄*_π, estimated
/// from seeded draws in fixed-size chunks summed in index order.
pub fn simulate_optimal_risk(dgp: &SpikeNormal, draws: usize, seed: SeedSpec) -> f64 {
    const CHUNK: usize = 4096;
    let chunks = draws.div_ceil(CHUNK);
    let total: f64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(draws - c * CHUNK);
            let s = seed.substream(c as u64);
            let mus = draw_means(dgp, count, s.substream(0));
            let mut rng = s.substream(1).rng();
            mus.iter()
                .map(|&mu| {
                    let x = mu + dgp.sigma * rng.sample::<f64, _>(StandardNormal);
                    let d = spike_normal_optimal_m(x, dgp) - mu;
                    d * d
                })
                .sum::<f64>()
        })
        .sum();
    total / draws as f64
}
