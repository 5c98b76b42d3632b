//! Normal-kernel density estimation with the two bandwidth rules used
//! by the pretest SURE penalty and the distribution plots.

use crate::numerics::std_normal_pdf;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthRule {
    /// 0.9 · min(sd, IQR/1.34) · n^{-1/5}
    SilvermanRuleOfThumb,
    /// 1.06 · sd · n^{-1/5}
    NormalReference,
}

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("bandwidth requires at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("sample has zero variance")]
    ZeroVariance,
}

fn sample_sd(sample: &[f64]) -> f64 {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    (sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Linear-interpolation quantile on a sorted copy (type-7).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Kernel bandwidth per the chosen rule.
pub fn bandwidth(sample: &[f64], rule: BandwidthRule) -> Result<f64, DensityError> {
    if sample.len() < 2 {
        return Err(DensityError::TooFewObservations(sample.len()));
    }
    let sd = sample_sd(sample);
    if sd <= 0.0 {
        return Err(DensityError::ZeroVariance);
    }
    let n_pow = (sample.len() as f64).powf(-0.2);
    Ok(match rule {
        BandwidthRule::NormalReference => 1.06 * sd * n_pow,
        BandwidthRule::SilvermanRuleOfThumb => {
            let mut sorted = sample.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
            let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
            0.9 * spread * n_pow
        }
    })
}

/// Normal-kernel density estimate over a fixed sample.
#[derive(Debug, Clone)]
pub struct KernelDensity {
    sample: Vec<f64>,
    bandwidth: f64,
}

impl KernelDensity {
    pub fn new(sample: Vec<f64>, rule: BandwidthRule) -> Result<Self, DensityError> {
        let h = bandwidth(&sample, rule)?;
        Ok(KernelDensity { sample, bandwidth: h })
    }

    /// Construct with an explicit bandwidth (test hooks, degenerate samples).
    pub fn with_bandwidth(sample: Vec<f64>, bandwidth: f64) -> Self {
        assert!(bandwidth > 0.0, "bandwidth must be positive");
        KernelDensity { sample, bandwidth }
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn sample(&self) -> &[f64] {
        &self.sample
    }

    /// f̂(x) = (1/(n h)) Σ φ((x − Xᵢ)/h).
    pub fn eval(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        self.sample.iter().map(|&xi| std_normal_pdf((x - xi) / h)).sum::<f64>()
            / (self.sample.len() as f64 * h)
    }

    /// Evaluation grid for export: 512 points over [min − 3h, max + 3h].
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let lo = self.sample.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * self.bandwidth;
        let hi =
            self.sample.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * self.bandwidth;
        (0..512)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / 511.0;
                (x, self.eval(x))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_degenerate_samples() {
        assert!(matches!(
            bandwidth(&[1.0], BandwidthRule::NormalReference),
            Err(DensityError::TooFewObservations(1))
        ));
        assert!(matches!(
            bandwidth(&[2.0, 2.0, 2.0], BandwidthRule::SilvermanRuleOfThumb),
            Err(DensityError::ZeroVariance)
        ));
    }

    #[test]
    fn normal_reference_formula() {
        let sample: Vec<f64> = (0..100).map(|i| (i as f64 - 49.5) / 10.0).collect();
        let sd = sample_sd(&sample);
        let h = bandwidth(&sample, BandwidthRule::NormalReference).unwrap();
        assert_abs_diff_eq!(h, 1.06 * sd * 100.0_f64.powf(-0.2), epsilon = 1e-14);
    }

    #[test]
    fn rule_of_thumb_robust_to_outliers() {
        // heavy outliers inflate sd but not IQR, so the rule-of-thumb
        // bandwidth falls below the normal-reference one
        let mut sample: Vec<f64> = (0..50).map(|i| i as f64 / 50.0).collect();
        sample.push(1e3);
        sample.push(-1e3);
        let rot = bandwidth(&sample, BandwidthRule::SilvermanRuleOfThumb).unwrap();
        let nr = bandwidth(&sample, BandwidthRule::NormalReference).unwrap();
        assert!(rot < nr);
    }

    #[test]
    fn eval_single_point() {
        let kde = KernelDensity::with_bandwidth(vec![0.0], 1.0);
        assert_abs_diff_eq!(kde.eval(0.0), std_normal_pdf(0.0), epsilon = 1e-15);
    }

    #[test]
    fn symmetric_sample_symmetric_density() {
        let kde =
            KernelDensity::new(vec![-2.0, -1.0, 0.0, 1.0, 2.0], BandwidthRule::NormalReference)
                .unwrap();
        for &x in &[0.3, 1.1, 2.7] {
            assert_abs_diff_eq!(kde.eval(x), kde.eval(-x), epsilon = 1e-14);
        }
    }

    #[test]
    fn integrates_to_one() {
        let sample: Vec<f64> = (0..40).map(|i| ((i * 7919) % 100) as f64 / 10.0 - 5.0).collect();
        let kde = KernelDensity::new(sample.clone(), BandwidthRule::SilvermanRuleOfThumb).unwrap();
        let sd = sample_sd(&sample);
        let (lo, hi) = (-20.0 * sd, 20.0 * sd);
        let n = 20_000;
        let step = (hi - lo) / n as f64;
        let mut mass = 0.0;
        for i in 0..=n {
            let x = lo + i as f64 * step;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            mass += w * kde.eval(x) * step;
        }
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn tail_product_bounded() {
        let kde = KernelDensity::with_bandwidth(vec![0.0, 1.0, -3.0], 0.5);
        for &x in &[10.0, 100.0, 1e4, -1e6] {
            assert!((x * kde.eval(x)).abs() < 1.0);
        }
    }
}
