//! Cross-validation selection of λ from panel data: the hold-out
//! criterion, its leave-one-out version, and the final full-sample
//! estimator.

use crate::estimators::Kind;
use crate::numerics::{minimize_scalar, NumericsError, RegParam};
use crate::risk::{DEFAULT_GRID, DEFAULT_REFINE_TOL};
use thiserror::Error;

/// n×k replicate matrix: `values[i][j]` is replicate j of unit i.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSample {
    values: Vec<Vec<f64>>,
    k: usize,
}

#[derive(Debug, Error)]
pub enum CvError {
    #[error("panel needs k >= 2 replicates per unit, got {0}")]
    TooFewReplicates(usize),
    #[error("panel rows must have equal length")]
    Ragged,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvCriterion {
    Holdout,
    LeaveOneOut,
}

impl PanelSample {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self, CvError> {
        assert!(!values.is_empty(), "panel must be nonempty");
        let k = values[0].len();
        if k < 2 {
            return Err(CvError::TooFewReplicates(k));
        }
        if values.iter().any(|row| row.len() != k) {
            return Err(CvError::Ragged);
        }
        Ok(PanelSample { values, k })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Full k-replicate means X_{ki}.
    pub fn unit_means(&self) -> Vec<f64> {
        self.values.iter().map(|row| row.iter().sum::<f64>() / self.k as f64).collect()
    }

    /// Mean of all replicates except column `j`.
    fn loo_means(&self, j: usize) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| (row.iter().sum::<f64>() - row[j]) / (self.k - 1) as f64)
            .collect()
    }
}

/// Hold-out criterion with column `holdout` as the held-out replicate:
/// (1/n) Σ (m(X_{−holdout,i}, λ) − x_{holdout,i})².
pub fn cv_holdout_fold(panel: &PanelSample, kind: Kind, lambda: RegParam, holdout: usize) -> f64 {
    assert!(holdout < panel.k());
    let train = panel.loo_means(holdout);
    let n = panel.n() as f64;
    panel
        .rows()
        .iter()
        .zip(&train)
        .map(|(row, &xbar)| {
            let d = kind.m(xbar, lambda) - row[holdout];
            d * d
        })
        .sum::<f64>()
        / n
}

/// Hold-out criterion using replicate k as the hold-out.
pub fn cv_holdout(panel: &PanelSample, kind: Kind, lambda: RegParam) -> f64 {
    cv_holdout_fold(panel, kind, lambda, panel.k() - 1)
}

/// Leave-one-out criterion: the sum (not mean) of the hold-out
/// criterion over all k folds.
pub fn cv_loo(panel: &PanelSample, kind: Kind, lambda: RegParam) -> f64 {
    (0..panel.k()).map(|j| cv_holdout_fold(panel, kind, lambda, j)).sum()
}

pub fn cv_value(panel: &PanelSample, kind: Kind, criterion: CvCriterion, lambda: RegParam) -> f64 {
    match criterion {
        CvCriterion::Holdout => cv_holdout(panel, kind, lambda),
        CvCriterion::LeaveOneOut => cv_loo(panel, kind, lambda),
    }
}

/// Minimize the chosen criterion over λ and return λ̂ together with the
/// final estimates m(X_{ki}, λ̂) computed from the full k-replicate
/// means. `use_full_means = false` switches the final estimator to the
/// k−1-replicate training means of the hold-out fold.
pub fn select_cv(
    panel: &PanelSample,
    kind: Kind,
    criterion: CvCriterion,
) -> Result<(RegParam, Vec<f64>), CvError> {
    select_cv_with(panel, kind, criterion, true)
}

pub fn select_cv_with(
    panel: &PanelSample,
    kind: Kind,
    criterion: CvCriterion,
    use_full_means: bool,
) -> Result<(RegParam, Vec<f64>), CvError> {
    let (lambda, _) = minimize_scalar(
        |l| cv_value(panel, kind, criterion, l),
        DEFAULT_GRID,
        DEFAULT_REFINE_TOL,
    )?;
    let means = if use_full_means {
        panel.unit_means()
    } else {
        panel.loo_means(panel.k() - 1)
    };
    let estimates = means.iter().map(|&x| kind.m(x, lambda)).collect();
    Ok((lambda, estimates))
}
