//! Stein's unbiased risk estimate for ridge, lasso, and pretest on
//! studentized samples, and SURE-minimizing λ selection.

use crate::density::{KernelDensity, BandwidthRule, DensityError};
use crate::estimators::{Kind, SpikeNormal};
use crate::numerics::{minimize_scalar, NumericsError, RegParam, SeedSpec};
use crate::risk::{RiskCurve, DEFAULT_GRID, DEFAULT_REFINE_TOL};
use crate::simulate::{compound_loss, draw_means, draw_sample};
use rayon::prelude::*;
use thiserror::Error;

/// Studentized observations with unit noise variance implied. Callers
/// must divide raw estimates by their standard errors first.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    x: Vec<f64>,
}

impl Sample {
    pub fn new(x: Vec<f64>) -> Self {
        assert!(!x.is_empty(), "sample must be nonempty");
        assert!(x.iter().all(|v| v.is_finite()), "sample must be finite");
        Sample { x }
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Error)]
pub enum SureError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// The SURE objective for one estimator family. Pretest carries the
/// kernel density estimate used by its jump-correction term.
#[derive(Debug, Clone)]
pub struct SureCriterion {
    pub kind: Kind,
    pub sample: Sample,
    kde: Option<KernelDensity>,
}

impl SureCriterion {
    pub fn new(kind: Kind, sample: Sample) -> Result<Self, SureError> {
        let kde = match kind {
            Kind::Pretest => {
                Some(KernelDensity::new(sample.values().to_vec(), BandwidthRule::SilvermanRuleOfThumb)?)
            }
            _ => None,
        };
        Ok(SureCriterion { kind, sample, kde })
    }

    /// Pretest criterion with an explicit density estimate.
    pub fn pretest_with_kde(sample: Sample, kde: KernelDensity) -> Self {
        SureCriterion { kind: Kind::Pretest, sample, kde: Some(kde) }
    }

    pub fn kde(&self) -> Option<&KernelDensity> {
        self.kde.as_ref()
    }
}

/// r_n(λ): mean squared residual plus the divergence penalty
/// (ridge 2/(1+λ); lasso (2/n)Σ1(|Xᵢ|>λ); pretest adds the jump term
/// 2λ(f̂(−λ)+f̂(λ))). Negative values are legitimate and returned as-is.
pub fn sure_value(c: &SureCriterion, lambda: RegParam) -> f64 {
    let xs = c.sample.values();
    let n = xs.len() as f64;
    if lambda.is_infinite() {
        // full shrinkage: residual is the raw second moment, penalties
        // vanish (the pretest jump term decays as lambda * f(lambda))
        return xs.iter().map(|x| x * x).sum::<f64>() / n;
    }
    let residual = xs
        .iter()
        .map(|&x| {
            let d = c.kind.m(x, lambda) - x;
            d * d
        })
        .sum::<f64>()
        / n;
    let l = lambda.lambda();
    let penalty = match c.kind {
        Kind::Ridge => 2.0 / (1.0 + l),
        Kind::Lasso => 2.0 * xs.iter().filter(|x| x.abs() > l).count() as f64 / n,
        Kind::Pretest => {
            let kde = c.kde.as_ref().expect("pretest criterion carries a KDE");
            2.0 * xs.iter().filter(|x| x.abs() > l).count() as f64 / n
                + 2.0 * l * (kde.eval(-l) + kde.eval(l))
        }
    };
    residual + penalty
}

/// Minimize SURE over λ; returns λ̂, the minimal value, and the
/// evaluated grid curve for export.
pub fn select_sure(c: &SureCriterion) -> Result<(RegParam, f64, RiskCurve), SureError> {
    select_sure_with_grid(c, DEFAULT_GRID, DEFAULT_REFINE_TOL)
}

pub fn select_sure_with_grid(
    c: &SureCriterion,
    grid_points: usize,
    refine_tol: f64,
) -> Result<(RegParam, f64, RiskCurve), SureError> {
    let (lambda, value) = minimize_scalar(|l| sure_value(c, l), grid_points, refine_tol)?;
    let lambdas: Vec<RegParam> = (0..grid_points)
        .map(|i| RegParam::from_t(i as f64 / (grid_points - 1) as f64))
        .collect();
    let values: Vec<Vec<f64>> = lambdas.iter().map(|&l| vec![sure_value(c, l)]).collect();
    let curve = RiskCurve { lambdas, labels: vec![c.kind.label().to_string()], values };
    Ok((lambda, value, curve))
}

/// Compound loss over the sample for known means.
fn loss_at(kind: Kind, xs: &[f64], mus: &[f64], lambda: RegParam) -> f64 {
    let est: Vec<f64> = xs.iter().map(|&x| kind.m(x, lambda)).collect();
    compound_loss(&est, mus)
}

/// Mean excess loss of the SURE selector over the infeasible loss
/// minimizer, over seeded replications: E[L_n(λ̂) − inf_λ L_n(λ)].
pub fn sure_oracle_gap(
    dgp: &SpikeNormal,
    n: usize,
    reps: usize,
    kind: Kind,
    seed: SeedSpec,
) -> Result<f64, SureError> {
    assert!((dgp.sigma - 1.0).abs() < 1e-12, "SURE assumes unit noise variance");
    let gaps = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let s = seed.substream(rep as u64);
            let mus = draw_means(dgp, n, s.substream(0));
            let xs = draw_sample(&mus, s.substream(1));
            let criterion = SureCriterion::new(kind, Sample::new(xs.clone()))?;
            let (lambda_hat, _) =
                minimize_scalar(|l| sure_value(&criterion, l), DEFAULT_GRID, DEFAULT_REFINE_TOL)?;
            let (_, best_loss) = minimize_scalar(
                |l| loss_at(kind, &xs, &mus, l),
                DEFAULT_GRID,
                DEFAULT_REFINE_TOL,
            )?;
            Ok(loss_at(kind, &xs, &mus, lambda_hat) - best_loss)
        })
        .collect::<Result<Vec<f64>, SureError>>()?;
    Ok(gaps.iter().sum::<f64>() / reps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lam(l: f64) -> RegParam {
        RegParam::from_lambda(l)
    }

    #[test]
    fn ridge_at_zero_is_two() {
        let c = SureCriterion::new(Kind::Ridge, Sample::new(vec![1.0, -2.0, 0.5])).unwrap();
        assert_abs_diff_eq!(sure_value(&c, lam(0.0)), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn lasso_beyond_max_is_second_moment() {
        let xs = vec![1.0, -2.0, 0.5];
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / 3.0;
        let c = SureCriterion::new(Kind::Lasso, Sample::new(xs)).unwrap();
        assert_abs_diff_eq!(sure_value(&c, lam(3.0)), m2, epsilon = 1e-14);
        assert_abs_diff_eq!(sure_value(&c, RegParam::INFINITE), m2, epsilon = 1e-14);
    }

    #[test]
    fn selected_lambda_dominates_grid() {
        let xs: Vec<f64> = (0..60).map(|i| ((i * 37) % 17) as f64 / 3.0 - 2.5).collect();
        for kind in Kind::ALL {
            let c = SureCriterion::new(kind, Sample::new(xs.clone())).unwrap();
            let (_, v, curve) = select_sure(&c).unwrap();
            for row in &curve.values {
                assert!(v <= row[0] + 1e-12);
            }
        }
    }

    #[test]
    fn zero_sample_minimal_value_is_zero() {
        let xs = vec![0.0; 8];
        // ridge: criterion 2/(1+lambda) is monotone decreasing, minimum 0 at infinity
        let ridge = SureCriterion::new(Kind::Ridge, Sample::new(xs.clone())).unwrap();
        let (l, v, _) = select_sure(&ridge).unwrap();
        assert!(l.is_infinite());
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        // lasso/pretest: zero residual everywhere, penalty 0 for any lambda > 0
        let lasso = SureCriterion::new(Kind::Lasso, Sample::new(xs.clone())).unwrap();
        let (_, v2, _) = select_sure(&lasso).unwrap();
        assert_abs_diff_eq!(v2, 0.0, epsilon = 1e-12);
        let kde = KernelDensity::with_bandwidth(xs.clone(), 1.0);
        let pretest = SureCriterion::pretest_with_kde(Sample::new(xs), kde);
        let (_, v3, _) = select_sure(&pretest).unwrap();
        assert!(v3 <= 0.0 + 1e-9);
    }

    #[test]
    fn right_continuous_at_sample_points() {
        let xs = vec![-1.0, 1.0, 2.0];
        let c = SureCriterion::new(Kind::Lasso, Sample::new(xs)).unwrap();
        let at = sure_value(&c, lam(1.0));
        let just_above = sure_value(&c, lam(1.0 + 1e-9));
        // the indicator convention |X| > lambda makes the criterion
        // right-continuous at sample points
        assert!((at - just_above).abs() < 1e-6);
        let just_below = sure_value(&c, lam(1.0 - 1e-9));
        assert!((at - just_below).abs() > 0.1);
    }

    #[test]
    fn penalty_matches_finite_difference_divergence() {
        let xs: Vec<f64> = vec![-2.3, -0.9, 0.4, 1.7, 3.1];
        let n = xs.len() as f64;
        let h = 1e-5;
        for kind in [Kind::Ridge, Kind::Lasso] {
            for &l in &[0.5, 1.2] {
                let lambda = lam(l);
                let numeric: f64 = xs
                    .iter()
                    .map(|&x| (kind.m(x + h, lambda) - kind.m(x - h, lambda)) / (2.0 * h))
                    .sum::<f64>()
                    * 2.0
                    / n;
                let analytic = match kind {
                    Kind::Ridge => 2.0 / (1.0 + l),
                    Kind::Lasso => 2.0 * xs.iter().filter(|x| x.abs() > l).count() as f64 / n,
                    Kind::Pretest => unreachable!(),
                };
                assert_abs_diff_eq!(numeric, analytic, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn gap_zero_for_oracle_selector() {
        // replacing the selector by the loss minimizer itself gives gap 0
        let xs = vec![0.3, -1.2, 2.0, 0.7];
        let mus = vec![0.0, -1.0, 2.0, 1.0];
        let (l_star, best) =
            minimize_scalar(|l| loss_at(Kind::Ridge, &xs, &mus, l), 201, 1e-6).unwrap();
        assert_abs_diff_eq!(loss_at(Kind::Ridge, &xs, &mus, l_star) - best, 0.0, epsilon = 1e-15);
    }
}
