//! Scalar special functions, Gauss-Hermite quadrature, the seeded RNG
//! contract, and the 1-D minimizer over [0, ∞] used by every selector.

use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

/// A regularization parameter λ ∈ [0, ∞], addressed through the compact
/// coordinate t = λ/(1+λ) ∈ [0, 1] so that λ = ∞ is representable
/// exactly (t = 1). λ itself is kept so λ→t→λ round trips are exact.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RegParam {
    lambda: f64,
}

impl RegParam {
    pub const ZERO: RegParam = RegParam { lambda: 0.0 };
    pub const INFINITE: RegParam = RegParam { lambda: f64::INFINITY };

    /// Construct from the compact coordinate t ∈ [0, 1].
    pub fn from_t(t: f64) -> Self {
        assert!((0.0..=1.0).contains(&t), "t must lie in [0, 1], got {t}");
        if t >= 1.0 {
            RegParam::INFINITE
        } else {
            RegParam { lambda: t / (1.0 - t) }
        }
    }

    /// Construct from λ ∈ [0, ∞].
    pub fn from_lambda(lambda: f64) -> Self {
        assert!(lambda >= 0.0, "lambda must be nonnegative, got {lambda}");
        RegParam { lambda }
    }

    /// t = λ/(1+λ), with λ = ∞ giving exactly 1.
    pub fn t(&self) -> f64 {
        if self.lambda.is_infinite() {
            1.0
        } else {
            self.lambda / (1.0 + self.lambda)
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_infinite(&self) -> bool {
        self.lambda.is_infinite()
    }
}

/// Identifies one reproducible random stream: results must be
/// bit-identical for the same (master_seed, stream_id) regardless of
/// scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        SeedSpec { master_seed, stream_id }
    }

    /// Derive an independent sub-stream.
    pub fn substream(&self, id: u64) -> SeedSpec {
        // splitmix-style mixing keeps distinct (stream, id) pairs apart
        let mut z = self
            .stream_id
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(id)
            .wrapping_add(0x2545_F491_4F6C_DD1D);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        SeedSpec { master_seed: self.master_seed, stream_id: z ^ (z >> 31) }
    }

    /// Instantiate the stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

const INV_SQRT_2PI: f64 = 0.3989422804014326779399461;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal density φ(x).
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// log φ(x), safe far into the tails.
pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - 0.9189385332046727417803297
}

/// Standard normal CDF Φ(x) via the complementary error function,
/// accurate to ~1e-15 absolute. ±∞ map to {0, 1}.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x / SQRT_2)
}

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("objective returned a non-finite value at t = {t}")]
    NonFiniteObjective { t: f64 },
    #[error("gauss_hermite nodes must lie in 1..=256, got {0}")]
    NodesOutOfRange(usize),
}

/// Minimize `f` over λ ∈ [0, ∞] in the compact t-coordinate: evaluate
/// on a uniform t-grid including both endpoints, then golden-section
/// refine inside the best bracketing triple. Ties break toward the
/// smaller t (less shrinkage).
pub fn minimize_scalar<F>(
    mut f: F,
    grid_points: usize,
    refine_tol: f64,
) -> Result<(RegParam, f64), NumericsError>
where
    F: FnMut(RegParam) -> f64,
{
    assert!(grid_points >= 3, "grid_points must be >= 3");
    let n = grid_points;
    let mut best_idx = 0usize;
    let mut best_val = f64::INFINITY;
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let v = f(RegParam::from_t(t));
        if !v.is_finite() {
            return Err(NumericsError::NonFiniteObjective { t });
        }
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
        vals.push(v);
    }

    let step = 1.0 / (n - 1) as f64;
    // bracket around the best grid point; endpoints get a one-sided bracket
    let mut a = if best_idx == 0 { 0.0 } else { (best_idx - 1) as f64 * step };
    let mut b = if best_idx == n - 1 { 1.0 } else { (best_idx + 1) as f64 * step };

    // golden-section refinement
    const INV_PHI: f64 = 0.6180339887498949;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(RegParam::from_t(c));
    let mut fd = f(RegParam::from_t(d));
    if !fc.is_finite() {
        return Err(NumericsError::NonFiniteObjective { t: c });
    }
    if !fd.is_finite() {
        return Err(NumericsError::NonFiniteObjective { t: d });
    }
    while b - a > refine_tol {
        // tie toward smaller t: strict inequality keeps the left interval
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(RegParam::from_t(c));
            if !fc.is_finite() {
                return Err(NumericsError::NonFiniteObjective { t: c });
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(RegParam::from_t(d));
            if !fd.is_finite() {
                return Err(NumericsError::NonFiniteObjective { t: d });
            }
        }
    }

    // candidates: refined midpoint plus the original grid winner; prefer
    // the grid point when values tie so endpoint minima stay exact
    let t_mid = 0.5 * (a + b);
    let f_mid = f(RegParam::from_t(t_mid));
    let t_grid = best_idx as f64 * step;
    let mut cand = vec![(t_grid, vals[best_idx])];
    if f_mid.is_finite() {
        cand.push((t_mid, f_mid));
    }
    // smallest value wins; on near-ties (within refine_tol of each other
    // in value) take the smaller t
    cand.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut best = cand[0];
    for &(t, v) in &cand[1..] {
        if v < best.1 {
            best = (t, v);
        }
    }
    Ok((RegParam::from_t(best.0), best.1))
}

/// Gauss-Hermite abscissae and weights for ∫ f(x) e^{-x²} dx, computed
/// by Golub-Welsch on the Jacobi matrix of the Hermite recurrence.
/// Rules are cached per node count: the O(n³) eigendecomposition would
/// otherwise dominate repeated quadrature calls.
pub fn gauss_hermite(nodes: usize) -> Result<(Vec<f64>, Vec<f64>), NumericsError> {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&nodes) {
        return Ok(rule.clone());
    }
    let rule = gauss_hermite_uncached(nodes)?;
    cache.lock().unwrap().insert(nodes, rule.clone());
    Ok(rule)
}

fn gauss_hermite_uncached(nodes: usize) -> Result<(Vec<f64>, Vec<f64>), NumericsError> {
    if nodes == 0 || nodes > 256 {
        return Err(NumericsError::NodesOutOfRange(nodes));
    }
    let n = nodes;
    if n == 1 {
        return Ok((vec![0.0], vec![std::f64::consts::PI.sqrt()]));
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        jac[(i, i - 1)] = b;
        jac[(i - 1, i)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mu0 = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let x = eig.eigenvalues[j];
            let v0 = eig.eigenvectors[(0, j)];
            (x, mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // symmetrize: eigen-solvers leave ~1e-16 asymmetry, the rule is exact
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Ok(pairs.into_iter().unzip())
}
