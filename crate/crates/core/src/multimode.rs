//! Multimode Gaussian communication: water-filling over the noise spectrum,
//! the determinant form of the Gaussian mutual information, and the
//! additivity experiment that compares entangled encodings/measurements with
//! the separable one.

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{min_noise, PhaseInsensitiveChannel};
use crate::cm::{
    apply_passive, input_photon_number, sorted_eigenvalues, squeezed_diag_cm, symmetrize,
    PassiveSymplectic, SqueezingSpectrum,
};
use crate::error::{invalid, Error, Result};
use crate::par::{map_range, Execution};
use crate::rng::task_rng;

/// Optimal power allocation `p_j = max(nu - lambda_j, 0)` for a noise
/// spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfillAllocation {
    /// Noise eigenvalues, ascending.
    pub lambdas: Vec<f64>,
    pub nu: f64,
    /// Power per eigenvalue, aligned with `lambdas`.
    pub powers: Vec<f64>,
    pub k_active: usize,
    pub mutual_info_bits: f64,
}

impl WaterfillAllocation {
    pub fn budget(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Water-filling for the parallel Gaussian channels with noise `lambdas`
/// under a total power `budget`.
pub fn waterfill(lambdas: &[f64], budget: f64) -> Result<WaterfillAllocation> {
    if lambdas.is_empty() {
        return Err(invalid("noise spectrum is empty"));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
        return Err(invalid(format!("noise eigenvalue {bad} must be positive")));
    }
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(invalid(format!("power budget {budget} must be >= 0")));
    }
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(f64::total_cmp);
    let d = lambdas.len();
    if budget == 0.0 {
        return Ok(WaterfillAllocation {
            nu: lambdas[0],
            powers: vec![0.0; d],
            k_active: 0,
            mutual_info_bits: 0.0,
            lambdas,
        });
    }

    let mut prefix = 0.0;
    let mut chosen = None;
    for k in 1..=d {
        prefix += lambdas[k - 1];
        let nu = (budget + prefix) / k as f64;
        if nu > lambdas[k - 1] {
            chosen = Some((k, nu));
            if k == d || nu <= lambdas[k] {
                break;
            }
        }
    }
    // budget > 0 guarantees k = 1 qualifies
    let (k_active, nu) = chosen.expect("positive budget fills at least one level");

    let powers = lambdas.iter().map(|l| (nu - l).max(0.0)).collect();
    let mutual_info_bits = 0.5 * lambdas[..k_active].iter().map(|l| (nu / l).log2()).sum::<f64>();
    Ok(WaterfillAllocation {
        lambdas,
        nu,
        powers,
        k_active,
        mutual_info_bits,
    })
}

/// Mutual information (bits) of parallel Gaussian channels with noise
/// `lambdas` and signal powers `powers`: `1/2 sum log2(1 + p_j / lambda_j)`.
pub fn parallel_channel_information(lambdas: &[f64], powers: &[f64]) -> f64 {
    0.5 * lambdas
        .iter()
        .zip(powers)
        .map(|(l, p)| (p / l).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// `1/2 log2 det(P + N) / det(N)`.
pub fn mutual_information_gaussian(p_out: &DMatrix<f64>, gamma_noise: &DMatrix<f64>) -> Result<f64> {
    let n = gamma_noise.nrows();
    if gamma_noise.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: gamma_noise.ncols(),
        });
    }
    if p_out.nrows() != n || p_out.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: p_out.nrows(),
        });
    }
    let scale = 1.0 + p_out.amax();
    let asym = (p_out - p_out.transpose()).amax();
    if asym > 1e-9 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let min_p = sorted_eigenvalues(&symmetrize(p_out.clone()))[0];
    if min_p < -1e-12 * scale {
        return Err(invalid(format!(
            "signal covariance is not positive semidefinite (min eigenvalue {min_p:e})"
        )));
    }
    let noise = symmetrize(gamma_noise.clone());
    let log_det_noise = log_det(&noise).ok_or(Error::NotPositiveDefinite(sorted_eigenvalues(&noise)[0]))?;
    let total = symmetrize(p_out + &noise);
    let log_det_total = log_det(&total).ok_or(Error::NotPositiveDefinite(sorted_eigenvalues(&total)[0]))?;
    Ok((0.5 * (log_det_total - log_det_noise) / std::f64::consts::LN_2).max(0.0))
}

fn log_det(m: &DMatrix<f64>) -> Option<f64> {
    let chol = Cholesky::new(m.clone())?;
    Some(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Fixed multimode encoding/decoding configuration: input squeezing `r_j`
/// in basis `S_{U_0}`, measurement squeezing `s_j` in basis `S_{U_M}`, `N`
/// uses of one channel, and an energy budget of `n_bar` photons per use.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeScenario {
    input_squeezing: SqueezingSpectrum,
    measurement_squeezing: SqueezingSpectrum,
    input_basis: PassiveSymplectic,
    measurement_basis: PassiveSymplectic,
    channel: PhaseInsensitiveChannel,
    n_bar: f64,
}

impl MultimodeScenario {
    pub fn new(
        input_squeezing: SqueezingSpectrum,
        measurement_squeezing: SqueezingSpectrum,
        input_basis: PassiveSymplectic,
        measurement_basis: PassiveSymplectic,
        channel: PhaseInsensitiveChannel,
        n_bar: f64,
    ) -> Result<Self> {
        let n = input_squeezing.n_modes();
        for other in [
            measurement_squeezing.n_modes(),
            input_basis.n_modes(),
            measurement_basis.n_modes(),
        ] {
            if other != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: other,
                });
            }
        }
        if !(n_bar >= 0.0) || !n_bar.is_finite() {
            return Err(invalid(format!("mean photon number {n_bar} must be >= 0")));
        }
        let n0 = input_squeezing.photon_number();
        if n0 > n as f64 * n_bar + 1e-12 {
            return Err(Error::Precondition(format!(
                "squeezing energy n_0 = {n0} exceeds the budget N n = {}",
                n as f64 * n_bar
            )));
        }
        Ok(MultimodeScenario {
            input_squeezing,
            measurement_squeezing,
            input_basis,
            measurement_basis,
            channel,
            n_bar,
        })
    }

    /// Same spectra and channel with product (identity) bases.
    pub fn separable(&self) -> MultimodeScenario {
        let n = self.n_modes();
        MultimodeScenario {
            input_basis: PassiveSymplectic::identity(n),
            measurement_basis: PassiveSymplectic::identity(n),
            ..self.clone()
        }
    }

    pub fn n_modes(&self) -> usize {
        self.input_squeezing.n_modes()
    }

    pub fn channel(&self) -> &PhaseInsensitiveChannel {
        &self.channel
    }

    pub fn n_bar(&self) -> f64 {
        self.n_bar
    }

    pub fn input_squeezing(&self) -> &SqueezingSpectrum {
        &self.input_squeezing
    }

    pub fn measurement_squeezing(&self) -> &SqueezingSpectrum {
        &self.measurement_squeezing
    }

    /// Photons spent on squeezing, `n_0`.
    pub fn squeezing_photons(&self) -> f64 {
        input_photon_number(&squeezed_diag_cm(&self.input_squeezing))
    }

    /// Photons left for displacement, `n_s = N n - n_0`.
    pub fn signal_photons(&self) -> f64 {
        (self.n_modes() as f64 * self.n_bar - self.squeezing_photons()).max(0.0)
    }

    /// `tr P_out = 2 tau n_s`.
    pub fn signal_budget(&self) -> f64 {
        2.0 * self.channel.tau() * self.signal_photons()
    }

    /// `gamma_out + gamma_M`.
    pub fn noise_matrix(&self) -> DMatrix<f64> {
        let gamma_in = apply_passive(&squeezed_diag_cm(&self.input_squeezing), &self.input_basis)
            .expect("basis dimension checked at construction");
        let gamma_out = self.channel.apply_to_cm(&gamma_in);
        let gamma_m = apply_passive(
            &squeezed_diag_cm(&self.measurement_squeezing),
            &self.measurement_basis,
        )
        .expect("basis dimension checked at construction");
        symmetrize(gamma_out.matrix() + gamma_m.matrix())
    }

    /// Ordinary eigenvalues of the noise matrix, ascending.
    pub fn noise_spectrum(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.noise_matrix())
    }

    /// Diagonal of the noise matrix for product bases, ascending: entries
    /// `tau e^{-2r_j}/2 + m + e^{-2s_j}/2` and `tau e^{2r_j}/2 + m + e^{2s_j}/2`.
    pub fn separable_noise_spectrum(&self) -> Vec<f64> {
        let (tau, m) = (self.channel.tau(), self.channel.m());
        let mut mu: Vec<f64> = self
            .input_squeezing
            .values()
            .iter()
            .zip(self.measurement_squeezing.values())
            .flat_map(|(r, s)| {
                [
                    0.5 * tau * (-2.0 * r).exp() + m + 0.5 * (-2.0 * s).exp(),
                    0.5 * tau * (2.0 * r).exp() + m + 0.5 * (2.0 * s).exp(),
                ]
            })
            .collect();
        mu.sort_by(f64::total_cmp);
        mu
    }
}

/// Water-filled mutual information for the scenario's noise spectrum.
pub fn scenario_capacity(sc: &MultimodeScenario) -> Result<(f64, WaterfillAllocation)> {
    let alloc = waterfill(&sc.noise_spectrum(), sc.signal_budget())?;
    Ok((alloc.mutual_info_bits, alloc))
}

/// `f(mu) - f(lambda)`: how much the separable configuration beats the
/// scenario's entangled bases at the same squeezing and energy.
pub fn additivity_gap(sc: &MultimodeScenario) -> Result<f64> {
    let budget = sc.signal_budget();
    let entangled = waterfill(&sc.noise_spectrum(), budget)?;
    let separable = waterfill(&sc.separable_noise_spectrum(), budget)?;
    Ok(separable.mutual_info_bits - entangled.mutual_info_bits)
}

/// Sampling ranges for randomized scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSampler {
    pub min_modes: usize,
    pub max_modes: usize,
    /// Upper bound on each `r_j` and `s_j`.
    pub max_squeezing: f64,
    pub tau_range: (f64, f64),
    /// Added noise is drawn from `[m_min(tau), m_min(tau) + excess]`.
    pub max_excess_noise: f64,
    /// Upper end of the `n_bar` draw; the lower end is `n_0 / N + 0.01`.
    pub max_n_bar: f64,
}

impl Default for ScenarioSampler {
    fn default() -> Self {
        ScenarioSampler {
            min_modes: 1,
            max_modes: 4,
            max_squeezing: 2.0,
            tau_range: (0.1, 3.0),
            max_excess_noise: 5.0,
            max_n_bar: 5.0,
        }
    }
}

impl ScenarioSampler {
    pub fn validate(&self) -> Result<()> {
        if self.min_modes == 0 || self.max_modes < self.min_modes {
            return Err(invalid("mode range must satisfy 1 <= min <= max"));
        }
        if !(self.max_squeezing >= 0.0 && self.max_squeezing <= 5.0) {
            return Err(invalid("squeezing bound must lie in [0, 5]"));
        }
        if !(self.tau_range.0 > 0.0 && self.tau_range.1 >= self.tau_range.0) {
            return Err(invalid("tau range must be positive"));
        }
        if !(self.max_excess_noise >= 0.0 && self.max_n_bar > 0.0) {
            return Err(invalid("noise and energy bounds must be positive"));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MultimodeScenario> {
        let n = rng.random_range(self.min_modes..=self.max_modes);
        let r = SqueezingSpectrum::new((0..n).map(|_| rng.random_range(0.0..=self.max_squeezing)).collect())?;
        let s = SqueezingSpectrum::new((0..n).map(|_| rng.random_range(0.0..=self.max_squeezing)).collect())?;
        let u0 = PassiveSymplectic::haar(n, rng)?;
        let um = PassiveSymplectic::haar(n, rng)?;
        let tau = rng.random_range(self.tau_range.0..=self.tau_range.1);
        let m = min_noise(tau) + rng.random_range(0.0..=self.max_excess_noise);
        let channel = PhaseInsensitiveChannel::new(tau, m)?;
        let lo = r.photon_number() / n as f64 + 0.01;
        let hi = self.max_n_bar.max(lo);
        let n_bar = if hi > lo { rng.random_range(lo..hi) } else { lo };
        MultimodeScenario::new(r, s, u0, um, channel, n_bar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditivitySummary {
    pub trials: usize,
    pub min_gap: f64,
    pub max_gap: f64,
    pub mean_gap: f64,
    /// Trials with `gap < -tolerance`.
    pub violations: usize,
    pub worst_trial: usize,
    pub tolerance: f64,
}

/// Randomized check that no entangled configuration beats the separable
/// one. Trial `i` draws from its own stream of `seed`, so the summary does
/// not depend on the execution mode.
pub fn additivity_suite(
    sampler: &ScenarioSampler,
    trials: usize,
    seed: u64,
    tolerance: f64,
    exec: Execution,
) -> Result<AdditivitySummary> {
    sampler.validate()?;
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let gaps = map_range(exec, trials, |i| {
        let mut rng = task_rng(seed, i as u64);
        sampler.sample(&mut rng).and_then(|sc| additivity_gap(&sc))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let (worst_trial, min_gap) = gaps
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("trials > 0");
    Ok(AdditivitySummary {
        trials,
        min_gap,
        max_gap: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_gap: gaps.iter().sum::<f64>() / trials as f64,
        violations: gaps.iter().filter(|g| **g < -tolerance).count(),
        worst_trial,
        tolerance,
    })
}
