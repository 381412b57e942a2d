//! Majorization predicates and randomized checks of the inequalities behind
//! the optimality of separable encodings.
//!
//! Vectors are sorted ascending. `x ≺ y` (y majorizes x) means every prefix
//! sum of `x` is at least the matching prefix sum of `y`, with equal totals.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cm::sorted_eigenvalues;
use crate::error::{invalid, Error, Result};
use crate::multimode::waterfill;
use crate::par::{map_range, Execution};
use crate::rng::task_rng;

pub const MAJORIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumVector {
    values: Vec<f64>,
}

impl SpectrumVector {
    /// Sorts ascending; entries must be finite and nonnegative.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("spectrum vector must be nonempty"));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(invalid(format!("spectrum entry {bad} must be finite and >= 0")));
        }
        values.sort_by(f64::total_cmp);
        Ok(SpectrumVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// First `k` entries.
    pub fn truncated(&self, k: usize) -> SpectrumVector {
        SpectrumVector {
            values: self.values[..k.min(self.len())].to_vec(),
        }
    }
}

fn tolerance(x: &SpectrumVector, y: &SpectrumVector) -> f64 {
    MAJORIZATION_TOL * x.total().max(y.total()).max(1.0)
}

fn prefix_dominates(y: &SpectrumVector, x: &SpectrumVector, tol: f64) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let (mut sx, mut sy) = (0.0, 0.0);
    for (a, b) in x.values.iter().zip(&y.values) {
        sx += a;
        sy += b;
        if sx < sy - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `x ≺ y`.
pub fn majorizes(y: &SpectrumVector, x: &SpectrumVector) -> Result<bool> {
    let tol = tolerance(x, y);
    Ok(prefix_dominates(y, x, tol)? && (x.total() - y.total()).abs() <= tol)
}

/// `x ≺_w y`: prefix inequality on all `d` partial sums.
pub fn weakly_majorizes(y: &SpectrumVector, x: &SpectrumVector) -> Result<bool> {
    prefix_dominates(y, x, tolerance(x, y))
}

/// `f(lambda_1..lambda_k) = 1/2 sum log2(nu / lambda_j)` with
/// `nu = (budget + sum lambda) / k`: the water-filled information when all
/// `k` channels are active.
pub fn active_information(lambdas: &[f64], budget: f64) -> f64 {
    let k = lambdas.len() as f64;
    let nu = (budget + lambdas.iter().sum::<f64>()) / k;
    0.5 * lambdas.iter().map(|l| (nu / l).ln()).sum::<f64>() / std::f64::consts::LN_2
}

/// `df/dlambda_j = (1/nu - 1/lambda_j) / (2 ln 2)`.
pub fn active_information_gradient(lambdas: &[f64], budget: f64) -> Vec<f64> {
    let k = lambdas.len() as f64;
    let nu = (budget + lambdas.iter().sum::<f64>()) / k;
    lambdas
        .iter()
        .map(|l| 0.5 * (1.0 / nu - 1.0 / l) / std::f64::consts::LN_2)
        .collect()
}

/// Random ascending vector with every entry below its water level.
fn random_active_vector<R: Rng + ?Sized>(k: usize, budget: f64, rng: &mut R) -> Vec<f64> {
    let scale = budget * rng.random_range(0.05..3.0);
    let mut v: Vec<f64> = (0..k).map(|_| scale * rng.random_range(0.02..1.0)).collect();
    let mean = v.iter().sum::<f64>() / k as f64;
    let max = v.iter().copied().fold(0.0, f64::max);
    // active iff k (max - mean) < budget; contract toward the mean if needed
    let spread = k as f64 * (max - mean);
    if spread >= budget {
        let t = 0.99 * budget / spread * rng.random_range(0.2..1.0);
        for x in &mut v {
            *x = mean + t * (*x - mean);
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

/// Worst signed violation of Schur-convexity and monotonicity of
/// [`active_information`] over random arguments (`<= 0` means no violation).
///
/// Per trial: the pairwise criterion `(x_j - x_i)(df/dx_j - df/dx_i) >= 0`;
/// an equalizing transfer between two coordinates must not increase `f`; a
/// spreading transfer must not decrease it; raising one coordinate must
/// decrease it.
pub fn schur_convexity_check(k: usize, budget: f64, trials: usize, seed: u64) -> Result<f64> {
    if k < 2 {
        return Err(invalid("need at least two arguments"));
    }
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(invalid(format!("budget {budget} must be positive")));
    }
    let mut rng = task_rng(seed, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let x = random_active_vector(k, budget, &mut rng);
        let f0 = active_information(&x, budget);
        let grad = active_information_gradient(&x, budget);
        let nu = (budget + x.iter().sum::<f64>()) / k as f64;
        for i in 0..k {
            for j in (i + 1)..k {
                worst = worst.max(-(x[j] - x[i]) * (grad[j] - grad[i]));
            }
        }

        let i = rng.random_range(0..k - 1);
        let j = rng.random_range(i + 1..k);
        if x[j] > x[i] {
            let eps = rng.random_range(0.0..1.0) * 0.5 * (x[j] - x[i]);
            let mut y = x.clone();
            y[i] += eps;
            y[j] -= eps;
            worst = worst.max(active_information(&y, budget) - f0);
        }
        // spreading keeps the sum, hence nu; stay inside (0, nu]
        let room = (x[i]).min(nu - x[j]);
        if room > 0.0 {
            let eps = rng.random_range(0.0..1.0) * room;
            let mut y = x.clone();
            y[i] -= eps;
            y[j] += eps;
            worst = worst.max(f0 - active_information(&y, budget));
        }
        let up = rng.random_range(0..k);
        let mut y = x.clone();
        // raising one entry by d lifts nu by d/k, so stay below nu
        y[up] += rng.random_range(0.0..1.0) * (nu - x[up]) * 0.5;
        if y[up] > x[up] {
            worst = worst.max(active_information(&y, budget) - f0);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProofCase {
    /// `k_mu == k_lambda`
    Equal,
    /// `k_mu > k_lambda`: truncate the separable allocation.
    Truncate,
    /// `k_mu < k_lambda`: pad with null signals.
    Pad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub holds: bool,
    pub case: ProofCase,
    pub k_lambda: usize,
    pub k_mu: usize,
    pub f_lambda: f64,
    pub f_mu: f64,
}

/// Water-fills `lambda` and `mu` with the same budget and checks
/// `f(lambda) <= f(mu)`; requires `lambda ≺ mu`.
pub fn case_inequality_check(
    lambda: &SpectrumVector,
    mu: &SpectrumVector,
    budget: f64,
) -> Result<CaseOutcome> {
    if !majorizes(mu, lambda)? {
        return Err(Error::Precondition("lambda is not majorized by mu".into()));
    }
    if !(budget > 0.0) {
        return Err(invalid(format!("budget {budget} must be positive")));
    }
    let wl = waterfill(lambda.values(), budget)?;
    let wm = waterfill(mu.values(), budget)?;
    let case = match wm.k_active.cmp(&wl.k_active) {
        std::cmp::Ordering::Equal => ProofCase::Equal,
        std::cmp::Ordering::Greater => ProofCase::Truncate,
        std::cmp::Ordering::Less => ProofCase::Pad,
    };
    Ok(CaseOutcome {
        holds: wl.mutual_info_bits <= wm.mutual_info_bits + 1e-9,
        case,
        k_lambda: wl.k_active,
        k_mu: wm.k_active,
        f_lambda: wl.mutual_info_bits,
        f_mu: wm.mutual_info_bits,
    })
}

/// `x = D y` for a random doubly-stochastic `D` built from T-transforms, so
/// that `x ≺ y`. Returns `(x, y)`.
pub fn random_majorized_pair<R: Rng + ?Sized>(d: usize, rng: &mut R) -> (SpectrumVector, SpectrumVector) {
    let y: Vec<f64> = (0..d)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            (1.2 * z).exp()
        })
        .collect();
    let mut x = y.clone();
    if d > 1 {
        for _ in 0..rng.random_range(1..=2 * d) {
            let i = rng.random_range(0..d);
            let j = (i + rng.random_range(1..d)) % d;
            let t: f64 = rng.random_range(0.0..1.0);
            let (a, b) = (x[i], x[j]);
            x[i] = t * a + (1.0 - t) * b;
            x[j] = (1.0 - t) * a + t * b;
        }
    }
    (
        SpectrumVector::new(x).expect("convex combinations of positives"),
        SpectrumVector::new(y).expect("positive draws"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseSuiteSummary {
    pub trials: usize,
    pub violations: usize,
    pub equal: usize,
    pub truncate: usize,
    pub pad: usize,
    /// Largest `f(lambda) - f(mu)` seen (should be `<= 0`).
    pub worst_excess: f64,
}

/// Randomized `f(lambda) <= f(mu)` over majorized pairs of dimension
/// `2..=max_dim` and log-uniform budgets.
pub fn case_inequality_suite(
    trials: usize,
    max_dim: usize,
    seed: u64,
    exec: Execution,
) -> Result<CaseSuiteSummary> {
    if max_dim < 2 {
        return Err(invalid("max_dim must be >= 2"));
    }
    let outcomes = map_range(exec, trials, |t| {
        let mut rng = task_rng(seed, t as u64);
        let d = rng.random_range(2..=max_dim);
        let (lambda, mu) = random_majorized_pair(d, &mut rng);
        let budget = mu.total() * 10f64.powf(rng.random_range(-3.0..0.5));
        case_inequality_check(&lambda, &mu, budget)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let count = |c: ProofCase| outcomes.iter().filter(|o| o.case == c).count();
    Ok(CaseSuiteSummary {
        trials,
        violations: outcomes.iter().filter(|o| !o.holds).count(),
        equal: count(ProofCase::Equal),
        truncate: count(ProofCase::Truncate),
        pad: count(ProofCase::Pad),
        worst_excess: outcomes
            .iter()
            .map(|o| o.f_lambda - o.f_mu)
            .fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Whether the eigenvalues of `X + Y` are majorized by the sum of the
/// ascending spectra of `X` and `Y` (both positive semidefinite).
pub fn eigen_sum_majorized(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<bool> {
    let ex = sorted_eigenvalues(x);
    let ey = sorted_eigenvalues(y);
    let sum: Vec<f64> = ex.iter().zip(&ey).map(|(a, b)| (a + b).max(0.0)).collect();
    let joint: Vec<f64> = sorted_eigenvalues(&(x + y)).into_iter().map(|v| v.max(0.0)).collect();
    majorizes(&SpectrumVector::new(sum)?, &SpectrumVector::new(joint)?)
}

fn random_psd<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let b = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    &b * b.transpose()
}

/// Number of random PSD pairs (sizes `1..=max_dim`) failing
/// [`eigen_sum_majorized`].
pub fn eigen_sum_suite(trials: usize, max_dim: usize, seed: u64, exec: Execution) -> Result<usize> {
    if max_dim == 0 {
        return Err(invalid("max_dim must be >= 1"));
    }
    let ok = map_range(exec, trials, |t| {
        let mut rng = task_rng(seed, t as u64);
        let d = rng.random_range(1..=max_dim);
        let x = random_psd(d, &mut rng);
        let y = random_psd(d, &mut rng);
        eigen_sum_majorized(&x, &y)
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;
    Ok(ok.iter().filter(|b| !**b).count())
}
