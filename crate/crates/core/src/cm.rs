//! Covariance-matrix formalism for N-mode Gaussian states.
//!
//! Quadratures are ordered `(x1, p1, x2, p2, ...)` and the vacuum has
//! covariance `I/2`. A displacement `alpha` corresponds to the mean vector
//! `sqrt(2) (Re alpha, Im alpha)`, so its mean photon number is `|d|^2 / 2`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::task_rng;

/// Tolerance on symplectic eigenvalues for the uncertainty principle.
pub const PHYSICAL_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-9;

/// Symmetric, positive-definite 2N x 2N covariance matrix of a physical state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    data: DMatrix<f64>,
}

impl CovMatrix {
    /// Validates symmetry (then stores the symmetrized matrix), positive
    /// definiteness and the uncertainty principle.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        check_even_square(&data)?;
        let asym = max_asymmetry(&data);
        if asym > SYMMETRY_TOL * (1.0 + data.amax()) {
            return Err(Error::NotSymmetric(asym));
        }
        let cm = CovMatrix::from_symmetric(symmetrize(data));
        let min_eig = cm.eigenvalues()[0];
        if !(min_eig > 0.0) {
            return Err(Error::NotPositiveDefinite(min_eig));
        }
        let nu = symplectic_eigenvalues(&cm)?;
        if nu[0] < 0.5 - PHYSICAL_TOL {
            return Err(Error::Unphysical(format!(
                "smallest symplectic eigenvalue {} < 1/2",
                nu[0]
            )));
        }
        Ok(cm)
    }

    pub(crate) fn from_symmetric(data: DMatrix<f64>) -> Self {
        CovMatrix { data }
    }

    /// Thermal state `(n_th + 1/2) I` on every mode.
    pub fn thermal(n_modes: usize, n_th: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("n_modes must be >= 1"));
        }
        if !(n_th >= 0.0) || !n_th.is_finite() {
            return Err(invalid(format!("thermal photon number {n_th} must be >= 0")));
        }
        Ok(CovMatrix::from_symmetric(DMatrix::identity(2 * n_modes, 2 * n_modes) * (n_th + 0.5)))
    }

    pub fn n_modes(&self) -> usize {
        self.data.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// Ordinary eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.data)
    }

    pub fn is_physical(&self) -> bool {
        symplectic_eigenvalues(self)
            .map(|nu| nu[0] >= 0.5 - PHYSICAL_TOL)
            .unwrap_or(false)
    }
}

/// Single-mode squeezing parameters, kept in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSpectrum {
    values: Vec<f64>,
}

impl SqueezingSpectrum {
    /// Sorts the parameters in descending order; rejects negative or
    /// non-finite entries.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("squeezing spectrum must have at least one mode"));
        }
        if let Some(bad) = values.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(invalid(format!("squeezing parameter {bad} must be finite and >= 0")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(SqueezingSpectrum { values })
    }

    pub fn unsqueezed(n_modes: usize) -> Result<Self> {
        SqueezingSpectrum::new(vec![0.0; n_modes])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_modes(&self) -> usize {
        self.values.len()
    }

    /// Photon number of the squeezed vacuum, `sum sinh^2 r_j`.
    pub fn photon_number(&self) -> f64 {
        self.values.iter().map(|r| r.sinh().powi(2)).sum()
    }
}

/// Orthogonal symplectic matrix of a passive (energy-conserving) unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveSymplectic {
    data: DMatrix<f64>,
}

impl PassiveSymplectic {
    pub fn identity(n_modes: usize) -> Self {
        PassiveSymplectic {
            data: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Real interleaved representation of an N x N unitary `U = A + iB`:
    /// `x' = A x - B p`, `p' = B x + A p`.
    pub fn from_unitary(u: &DMatrix<Complex64>) -> Result<Self> {
        let n = u.nrows();
        if n == 0 || u.ncols() != n {
            return Err(invalid("unitary must be a nonempty square matrix"));
        }
        let mut data = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (u[(i, j)].re, u[(i, j)].im);
                data[(2 * i, 2 * j)] = a;
                data[(2 * i, 2 * j + 1)] = -b;
                data[(2 * i + 1, 2 * j)] = b;
                data[(2 * i + 1, 2 * j + 1)] = a;
            }
        }
        let s = PassiveSymplectic { data };
        let (orth, sympl) = s.defects();
        if orth > 1e-10 || sympl > 1e-10 {
            return Err(invalid(format!(
                "matrix is not unitary (orthogonality defect {orth:e}, symplectic defect {sympl:e})"
            )));
        }
        Ok(s)
    }

    /// Haar-random passive transformation drawn from `rng`.
    pub fn haar<R: Rng + ?Sized>(n_modes: usize, rng: &mut R) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("n_modes must be >= 1"));
        }
        PassiveSymplectic::from_unitary(&haar_unitary(n_modes, rng))
    }

    /// 50:50 beamsplitter between modes `a` and `b`.
    pub fn beamsplitter(n_modes: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n_modes || b >= n_modes || a == b {
            return Err(invalid(format!("bad mode pair ({a}, {b}) for {n_modes} modes")));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = DMatrix::<Complex64>::identity(n_modes, n_modes);
        u[(a, a)] = Complex64::new(h, 0.0);
        u[(a, b)] = Complex64::new(h, 0.0);
        u[(b, a)] = Complex64::new(-h, 0.0);
        u[(b, b)] = Complex64::new(h, 0.0);
        PassiveSymplectic::from_unitary(&u)
    }

    pub fn n_modes(&self) -> usize {
        self.data.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// `(max |S^T S - I|, max |S Omega S^T - Omega|)`.
    pub fn defects(&self) -> (f64, f64) {
        let n = self.data.nrows();
        let orth = (self.data.transpose() * &self.data - DMatrix::identity(n, n)).amax();
        let omega = symplectic_form(n / 2);
        let sympl = (&self.data * &omega * self.data.transpose() - omega).amax();
        (orth, sympl)
    }
}

/// First moments `sqrt(2) (Re alpha_1, Im alpha_1, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanVector {
    data: Vec<f64>,
}

impl MeanVector {
    pub fn from_amplitudes(alphas: &[Complex64]) -> Self {
        let s = std::f64::consts::SQRT_2;
        let data = alphas.iter().flat_map(|a| [s * a.re, s * a.im]).collect();
        MeanVector { data }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn n_modes(&self) -> usize {
        self.data.len() / 2
    }

    pub fn photon_number(&self) -> f64 {
        0.5 * self.data.iter().map(|d| d * d).sum::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        MeanVector {
            data: self.data.iter().map(|d| d * factor).collect(),
        }
    }
}

/// Interleaved symplectic form `Omega = (+) [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

pub fn vacuum_cm(n_modes: usize) -> Result<CovMatrix> {
    CovMatrix::thermal(n_modes, 0.0)
}

/// Product of squeezed vacua, blocks `diag(e^{-2r}/2, e^{2r}/2)`.
pub fn squeezed_diag_cm(spectrum: &SqueezingSpectrum) -> CovMatrix {
    let diag: Vec<f64> = spectrum
        .values()
        .iter()
        .flat_map(|r| [0.5 * (-2.0 * r).exp(), 0.5 * (2.0 * r).exp()])
        .collect();
    CovMatrix::from_symmetric(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// `S gamma S^T`.
pub fn apply_passive(cm: &CovMatrix, s: &PassiveSymplectic) -> Result<CovMatrix> {
    if cm.dim() != s.data.nrows() {
        return Err(Error::DimensionMismatch {
            expected: cm.dim(),
            actual: s.data.nrows(),
        });
    }
    Ok(CovMatrix::from_symmetric(symmetrize(
        &s.data * &cm.data * s.data.transpose(),
    )))
}

pub fn random_passive_symplectic(n_modes: usize, seed: u64) -> Result<PassiveSymplectic> {
    let mut rng = task_rng(seed, 0);
    PassiveSymplectic::haar(n_modes, &mut rng)
}

/// Haar unitary via QR of a complex Ginibre matrix, with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Symplectic eigenvalues, ascending.
///
/// They are the moduli of the eigenvalues of `i Omega gamma`, obtained here
/// as square roots of the eigenvalues of `A^T A` with the antisymmetric
/// `A = gamma^{1/2} Omega gamma^{1/2}`; each appears twice.
pub fn symplectic_eigenvalues(cm: &CovMatrix) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::new(cm.data.clone());
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite(min));
    }
    let sqrt_diag = eig.eigenvalues.map(f64::sqrt);
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&sqrt_diag)
        * eig.eigenvectors.transpose();
    let a = &root * symplectic_form(cm.n_modes()) * &root;
    let nu_sq = sorted_eigenvalues(&symmetrize(a.transpose() * a));
    Ok(nu_sq
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect())
}

/// `n_0 = (tr gamma - N) / 2`.
pub fn input_photon_number(cm: &CovMatrix) -> f64 {
    0.5 * (cm.data.trace() - cm.n_modes() as f64)
}

pub(crate) fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

fn check_even_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(invalid(format!("covariance dimension {} is not 2N", m.nrows())));
    }
    Ok(())
}
