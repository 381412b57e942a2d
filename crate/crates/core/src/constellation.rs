//! Square QAM constellations of coherent states with uniform or
//! Gaussian-weighted priors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Finite set of coherent amplitudes with a prior.
///
/// Symbols are kept in canonical order, sorted by `(|alpha|, arg alpha)` with
/// the argument in `[0, 2 pi)`; index order is the receiver's tie-break.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    points: Vec<Complex64>,
    prior: Vec<f64>,
}

fn canonical_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

impl Alphabet {
    /// Normalizes the prior and sorts symbols canonically.
    pub fn new(points: Vec<Complex64>, prior: Vec<f64>) -> Result<Self> {
        Ok(Alphabet::with_order(points, prior)?.0)
    }

    /// Like [`Alphabet::new`], also returning the original index of each
    /// sorted symbol.
    fn with_order(points: Vec<Complex64>, prior: Vec<f64>) -> Result<(Self, Vec<usize>)> {
        if points.is_empty() || points.len() != prior.len() {
            return Err(invalid("alphabet needs matching nonempty points and prior"));
        }
        if prior.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid("prior entries must be finite and >= 0"));
        }
        let total: f64 = prior.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("prior has zero mass"));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            points[a]
                .norm_sqr()
                .total_cmp(&points[b].norm_sqr())
                .then(canonical_arg(points[a]).total_cmp(&canonical_arg(points[b])))
        });
        let alphabet = Alphabet {
            points: order.iter().map(|&i| points[i]).collect(),
            prior: order.iter().map(|&i| prior[i] / total).collect(),
        };
        Ok((alphabet, order))
    }

    pub fn uniform(points: Vec<Complex64>) -> Result<Self> {
        let n = points.len();
        Alphabet::new(points, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// `sum p_i |alpha_i|^2`.
    pub fn mean_photon_number(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.prior)
            .map(|(a, p)| p * a.norm_sqr())
            .sum()
    }

    /// Amplitudes scaled by `sqrt(eta)`; prior unchanged.
    pub fn attenuated(&self, eta: f64) -> Alphabet {
        let s = eta.sqrt();
        Alphabet {
            points: self.points.iter().map(|a| a * s).collect(),
            prior: self.prior.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QamOrder {
    Qam4,
    Qam16,
    Qam64,
}

impl QamOrder {
    pub fn from_size(m: usize) -> Result<Self> {
        match m {
            4 => Ok(QamOrder::Qam4),
            16 => Ok(QamOrder::Qam16),
            64 => Ok(QamOrder::Qam64),
            _ => Err(invalid(format!("QAM order {m} not in {{4, 16, 64}}"))),
        }
    }

    pub fn size(self) -> usize {
        match self {
            QamOrder::Qam4 => 4,
            QamOrder::Qam16 => 16,
            QamOrder::Qam64 => 64,
        }
    }

    pub fn side(self) -> usize {
        match self {
            QamOrder::Qam4 => 2,
            QamOrder::Qam16 => 4,
            QamOrder::Qam64 => 8,
        }
    }

    /// Per-axis coordinates for unit spacing: `-(s-1)/2, ..., (s-1)/2`.
    pub fn unit_levels(self) -> Vec<f64> {
        let s = self.side() as i64;
        (0..s).map(|i| (2 * i - (s - 1)) as f64 / 2.0).collect()
    }
}

/// Centered square QAM lattice with spacing `delta` and prior
/// `p_i ∝ exp(-|alpha_i|^2 / sigma^2)` (`sigma = ∞` is uniform).
#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: QamOrder,
    delta: f64,
    sigma: f64,
    alphabet: Alphabet,
    /// `(re, im)` level index of each canonical symbol.
    lattice: Vec<(usize, usize)>,
}

impl QamConstellation {
    pub fn build(m: usize, delta: f64, sigma: f64) -> Result<Self> {
        let order = QamOrder::from_size(m)?;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid(format!("spacing {delta} must be positive")));
        }
        if !(sigma > 0.0) || sigma.is_nan() {
            return Err(invalid(format!("prior deviation {sigma} must be positive or infinite")));
        }
        let levels = order.unit_levels();
        let side = order.side();
        let mut points = Vec::with_capacity(m);
        let mut cells = Vec::with_capacity(m);
        for (ix, x) in levels.iter().enumerate() {
            for (iy, y) in levels.iter().enumerate() {
                points.push(Complex64::new(x * delta, y * delta));
                cells.push((ix, iy));
            }
        }
        debug_assert_eq!(points.len(), side * side);
        let prior = gaussian_weights(&points, sigma);
        let (alphabet, order_idx) = Alphabet::with_order(points, prior)?;
        let lattice = order_idx.iter().map(|&i| cells[i]).collect();
        Ok(QamConstellation {
            order,
            delta,
            sigma,
            alphabet,
            lattice,
        })
    }

    pub fn order(&self) -> QamOrder {
        self.order
    }

    pub fn size(&self) -> usize {
        self.order.size()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_uniform(&self) -> bool {
        self.sigma.is_infinite()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn points(&self) -> &[Complex64] {
        self.alphabet.points()
    }

    pub fn prior(&self) -> &[f64] {
        self.alphabet.prior()
    }

    pub fn lattice_indices(&self) -> &[(usize, usize)] {
        &self.lattice
    }

    /// Axis coordinates of the lattice, ascending.
    pub fn axis_levels(&self) -> Vec<f64> {
        self.order.unit_levels().into_iter().map(|l| l * self.delta).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.alphabet.mean_photon_number()
    }

    /// Constellation after a pure-loss channel of transmittance `eta`:
    /// `delta' = sqrt(eta) delta`, `sigma' = sqrt(eta) sigma`.
    pub fn propagate(&self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid(format!("transmittance {eta} outside (0, 1]")));
        }
        let s = eta.sqrt();
        Ok(QamConstellation {
            order: self.order,
            delta: self.delta * s,
            sigma: self.sigma * s,
            alphabet: self.alphabet.attenuated(eta),
            lattice: self.lattice.clone(),
        })
    }

    pub fn record(&self) -> ConstellationRecord {
        ConstellationRecord {
            order: self.size(),
            delta: self.delta,
            sigma: self.sigma.is_finite().then_some(self.sigma),
            mean_photon_number: self.mean_photon_number(),
            points: self.points().iter().map(|z| [z.re, z.im]).collect(),
            prior: self.prior().to_vec(),
        }
    }
}

/// Serializable snapshot; `sigma = None` stands for the uniform prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationRecord {
    pub order: usize,
    pub delta: f64,
    pub sigma: Option<f64>,
    pub mean_photon_number: f64,
    pub points: Vec<[f64; 2]>,
    pub prior: Vec<f64>,
}

/// Weights `exp(-(|alpha|^2 - min |alpha|^2) / sigma^2)`, shifted so the
/// innermost ring never underflows.
fn gaussian_weights(points: &[Complex64], sigma: f64) -> Vec<f64> {
    if sigma.is_infinite() {
        return vec![1.0; points.len()];
    }
    let min = points.iter().map(|a| a.norm_sqr()).fold(f64::INFINITY, f64::min);
    points
        .iter()
        .map(|a| (-(a.norm_sqr() - min) / (sigma * sigma)).exp())
        .collect()
}

pub fn build_qam(m: usize, delta: f64, sigma: f64) -> Result<QamConstellation> {
    QamConstellation::build(m, delta, sigma)
}

/// Spacing `delta` at which the constellation carries `n_bar_target`
/// photons on average.
///
/// The energy lies between `delta^2 / 2` (inner ring) and the uniform-prior
/// energy `E_1 delta^2`, which brackets the root; monotonicity in `delta` is
/// checked on the bracket before bisecting.
pub fn solve_delta_for_energy(m: usize, sigma: f64, n_bar_target: f64) -> Result<f64> {
    if !(n_bar_target > 0.0) || !n_bar_target.is_finite() {
        return Err(invalid(format!("target energy {n_bar_target} must be positive")));
    }
    let unit_energy = build_qam(m, 1.0, f64::INFINITY)?.mean_photon_number();
    if sigma.is_infinite() {
        return Ok((n_bar_target / unit_energy).sqrt());
    }
    let energy = |delta: f64| build_qam(m, delta, sigma).map(|c| c.mean_photon_number());
    let lo = (n_bar_target / unit_energy).sqrt();
    let hi = (2.0 * n_bar_target).sqrt();
    if hi <= lo {
        return Ok(lo);
    }
    let probes = 64;
    let mut prev = energy(lo)?;
    for i in 1..=probes {
        let e = energy(lo + (hi - lo) * i as f64 / probes as f64)?;
        if e < prev * (1.0 - 1e-12) {
            return Err(Error::Bracket(format!(
                "energy is not monotone in delta on [{lo}, {hi}] (sigma = {sigma})"
            )));
        }
        prev = e;
    }
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (energy(a)? - n_bar_target, energy(b)? - n_bar_target);
    if fa > 1e-12 * n_bar_target || fb < -1e-12 * n_bar_target {
        return Err(Error::Bracket(format!(
            "energy {n_bar_target} not bracketed on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let f = energy(mid)? - n_bar_target;
        if f.abs() <= 1e-12 * n_bar_target.max(1.0) {
            return Ok(mid);
        }
        if f < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
