//! Data ingestion: studentization of raw estimates, panel assembly,
//! and the regression-to-means orthogonalization that turns an OLS
//! problem into a normal-means problem.

use crate::cv::CvError;
use crate::sure::Sample;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Raw estimates with standard errors, as read from an estimates CSV.
#[derive(Debug, Clone)]
pub struct RawEstimates {
    pub ids: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("standard error must be positive, got {se} for id {id}")]
    NonPositiveStdError { id: String, se: f64 },
    #[error("length mismatch between ids, estimates, and standard errors")]
    LengthMismatch,
    #[error("design matrix is rank deficient (relative eigenvalue {0:.3e} below cutoff)")]
    RankDeficient(f64),
    #[error("regression requires N >= n, got N = {rows} rows and n = {cols} regressors")]
    TooFewRows { rows: usize, cols: usize },
    #[error(transparent)]
    Panel(#[from] CvError),
    #[error("csv parse error: {0}")]
    Csv(String),
}

impl RawEstimates {
    pub fn new(
        ids: Vec<String>,
        estimates: Vec<f64>,
        std_errors: Vec<f64>,
    ) -> Result<Self, IngestError> {
        if ids.len() != estimates.len() || ids.len() != std_errors.len() {
            return Err(IngestError::LengthMismatch);
        }
        for (id, &se) in ids.iter().zip(&std_errors) {
            if !(se > 0.0) {
                return Err(IngestError::NonPositiveStdError { id: id.clone(), se });
            }
        }
        Ok(RawEstimates { ids, estimates, std_errors })
    }
}

/// Studentize: Xᵢ = estimateᵢ / seᵢ. The returned scale vector restores
/// original units: estimate = X · scale.
pub fn studentize(raw: &RawEstimates) -> (Sample, Vec<f64>) {
    let x: Vec<f64> =
        raw.estimates.iter().zip(&raw.std_errors).map(|(e, se)| e / se).collect();
    (Sample::new(x), raw.std_errors.clone())
}

/// A linear regression problem Y = Wβ + ε to be orthogonalized into
/// normal-means form.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub design: DMatrix<f64>,
    pub outcome: DVector<f64>,
}

const RANK_TOL: f64 = 1e-10;

/// Orthogonalize the regressors and regress: V = W·Ω^{−1/2} with
/// Ω = W'W/N (symmetric inverse square root), X the OLS coefficients
/// of Y on V. Then X ~ N(μ, (σ²/N)·I) with μ = Ω^{1/2}β, and
/// `noise_scale` = σ̂/√N estimates the common standard error.
pub fn orthogonalize(prob: &RegressionProblem) -> Result<(Sample, f64), IngestError> {
    let w = &prob.design;
    let y = &prob.outcome;
    let (big_n, n) = (w.nrows(), w.ncols());
    if big_n < n {
        return Err(IngestError::TooFewRows { rows: big_n, cols: n });
    }
    let omega = w.transpose() * w / big_n as f64;
    let eig = omega.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_ev = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_ev <= RANK_TOL * max_ev {
        return Err(IngestError::RankDeficient(min_ev / max_ev));
    }
    // symmetric inverse square root: Q diag(1/sqrt(ev)) Q'
    let inv_sqrt = DMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)] / eig.eigenvalues[k].sqrt())
            .sum()
    });
    let v = w * &inv_sqrt;
    // V'V/N = I, so the OLS coefficients reduce to V'Y/N
    let x = v.transpose() * y / big_n as f64;
    let residuals = y - &v * &x;
    let dof = (big_n - n).max(1);
    let sigma_hat_sq = residuals.norm_squared() / dof as f64;
    let noise_scale = (sigma_hat_sq / big_n as f64).sqrt();
    Ok((Sample::new(x.iter().cloned().collect()), noise_scale))
}
