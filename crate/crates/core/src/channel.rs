//! Phase-insensitive Gaussian channels `gamma -> tau gamma + m I`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cm::{symmetrize, CovMatrix};
use crate::error::{invalid, Error, Result};

/// Slack allowed on the complete-positivity condition `m >= |tau - 1| / 2`.
pub const CP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseInsensitiveChannel {
    tau: f64,
    m: f64,
}

impl PhaseInsensitiveChannel {
    pub fn new(tau: f64, m: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid(format!("gain tau = {tau} must be positive")));
        }
        let bound = min_noise(tau);
        if !m.is_finite() || m < bound - CP_TOL {
            return Err(Error::Unphysical(format!(
                "added noise m = {m} violates m >= |tau - 1| / 2 = {bound}"
            )));
        }
        Ok(PhaseInsensitiveChannel { tau, m: m.max(0.0) })
    }

    pub fn identity() -> Self {
        PhaseInsensitiveChannel { tau: 1.0, m: 0.0 }
    }

    /// Loss with transmittance `eta` in a thermal bath of `n_th` photons.
    pub fn from_loss(eta: f64, n_th: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid(format!("transmittance {eta} outside (0, 1]")));
        }
        check_nth(n_th)?;
        PhaseInsensitiveChannel::new(eta, (1.0 - eta) * (n_th + 0.5))
    }

    /// Amplifier with gain `g >= 1` and `n_th` thermal photons in the idler.
    pub fn from_amplifier(g: f64, n_th: f64) -> Result<Self> {
        if !(g >= 1.0) || !g.is_finite() {
            return Err(invalid(format!("amplifier gain {g} must be >= 1")));
        }
        check_nth(n_th)?;
        PhaseInsensitiveChannel::new(g, (g - 1.0) * (n_th + 0.5))
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `m + (tau - 1)/2`: the thermal occupation seen at the output for a
    /// vacuum input.
    pub fn output_vacuum_noise(&self) -> f64 {
        self.m + 0.5 * (self.tau - 1.0)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &PhaseInsensitiveChannel) -> PhaseInsensitiveChannel {
        PhaseInsensitiveChannel {
            tau: self.tau * next.tau,
            m: next.tau * self.m + next.m,
        }
    }

    /// `tau gamma + m I`, identically on every mode.
    pub fn apply_to_cm(&self, cm: &CovMatrix) -> CovMatrix {
        let n = cm.dim();
        CovMatrix::from_symmetric(cm.matrix() * self.tau + DMatrix::identity(n, n) * self.m)
    }

    /// Signal covariance after the channel, `tau P`.
    pub fn apply_to_signal(&self, p_in: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if p_in.nrows() != p_in.ncols() {
            return Err(Error::DimensionMismatch {
                expected: p_in.nrows(),
                actual: p_in.ncols(),
            });
        }
        let asym = (p_in - p_in.transpose()).amax();
        if asym > 1e-9 * (1.0 + p_in.amax()) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(symmetrize(p_in.clone()) * self.tau)
    }
}

/// Smallest added noise allowed for gain `tau` (vacuum variance 1/2).
pub fn min_noise(tau: f64) -> f64 {
    0.5 * (tau - 1.0).abs()
}

fn check_nth(n_th: f64) -> Result<()> {
    if !(n_th >= 0.0) || !n_th.is_finite() {
        return Err(invalid(format!("thermal photon number {n_th} must be >= 0")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cm::{
        apply_passive, random_passive_symplectic, squeezed_diag_cm, symplectic_eigenvalues,
        vacuum_cm, SqueezingSpectrum,
    };
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn constructors() {
        let id = PhaseInsensitiveChannel::from_loss(1.0, 0.0).unwrap();
        assert_eq!((id.tau(), id.m()), (1.0, 0.0));

        let ch = PhaseInsensitiveChannel::from_loss(0.5, 0.0).unwrap();
        assert_eq!((ch.tau(), ch.m()), (0.5, 0.25));

        let ch = PhaseInsensitiveChannel::from_loss(0.7, 1.0).unwrap();
        assert_abs_diff_eq!(ch.m(), 0.45, epsilon = 1e-15);

        let ch = PhaseInsensitiveChannel::from_amplifier(1.0, 5.0).unwrap();
        assert_eq!((ch.tau(), ch.m()), (1.0, 0.0));
        let ch = PhaseInsensitiveChannel::from_amplifier(1.5, 0.0).unwrap();
        assert_eq!((ch.tau(), ch.m()), (1.5, 0.25));
        let ch = PhaseInsensitiveChannel::from_amplifier(2.0, 1.0).unwrap();
        assert_eq!((ch.tau(), ch.m()), (2.0, 1.5));

        assert!(PhaseInsensitiveChannel::from_loss(0.0, 0.0).is_err());
        assert!(PhaseInsensitiveChannel::from_loss(1.2, 0.0).is_err());
        assert!(PhaseInsensitiveChannel::from_amplifier(0.9, 0.0).is_err());
        assert!(PhaseInsensitiveChannel::from_loss(0.5, -1.0).is_err());
        assert!(matches!(
            PhaseInsensitiveChannel::new(2.0, 0.4),
            Err(Error::Unphysical(_))
        ));
        assert!(PhaseInsensitiveChannel::new(2.0, 0.5 - 1e-13).is_ok());
        assert!(PhaseInsensitiveChannel::new(0.5, 0.25).is_ok());
    }

    #[test]
    fn cm_action() {
        let g = squeezed_diag_cm(&SqueezingSpectrum::new(vec![0.4, 0.2]).unwrap());
        assert_eq!(PhaseInsensitiveChannel::identity().apply_to_cm(&g), g);

        let vac = vacuum_cm(1).unwrap();
        let out = PhaseInsensitiveChannel::new(0.5, 0.25).unwrap().apply_to_cm(&vac);
        assert_abs_diff_eq!(out.matrix()[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.matrix()[(1, 1)], 0.5, epsilon = 1e-15);

        let out = PhaseInsensitiveChannel::new(2.0, 1.5).unwrap().apply_to_cm(&vac);
        assert_abs_diff_eq!(out.matrix()[(0, 0)], 2.5, epsilon = 1e-15);
        assert_eq!(out.matrix()[(0, 1)], 0.0);
    }

    #[test]
    fn signal_action() {
        let p = DMatrix::identity(2, 2) * 2.0;
        let ch = PhaseInsensitiveChannel::new(0.5, 0.25).unwrap();
        assert_eq!(ch.apply_to_signal(&p).unwrap(), DMatrix::identity(2, 2));
        let ch = PhaseInsensitiveChannel::new(2.0, 1.0).unwrap();
        let p = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            ch.apply_to_signal(&p).unwrap(),
            DMatrix::from_row_slice(2, 2, &[8.0, 0.0, 0.0, 0.0])
        );
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(ch.apply_to_signal(&p).is_err());
        assert_eq!(PhaseInsensitiveChannel::identity().apply_to_signal(&DMatrix::identity(2, 2)).unwrap(), DMatrix::identity(2, 2));
    }

    fn arb_channel() -> impl Strategy<Value = PhaseInsensitiveChannel> {
        (0.05f64..3.0, 0.0f64..3.0).prop_map(|(tau, extra)| {
            PhaseInsensitiveChannel::new(tau, min_noise(tau) + extra).unwrap()
        })
    }

    proptest! {
        #[test]
        fn composition(a in arb_channel(), b in arb_channel(), seed in any::<u64>(), r in 0.0f64..1.5) {
            let g = apply_passive(
                &squeezed_diag_cm(&SqueezingSpectrum::new(vec![r, r / 2.0]).unwrap()),
                &random_passive_symplectic(2, seed).unwrap(),
            ).unwrap();
            let two_step = b.apply_to_cm(&a.apply_to_cm(&g));
            let composed = a.then(&b).apply_to_cm(&g);
            prop_assert!((two_step.matrix() - composed.matrix()).amax() < 1e-12 * (1.0 + composed.matrix().amax()));
            prop_assert!(PhaseInsensitiveChannel::new(a.then(&b).tau(), a.then(&b).m()).is_ok());
        }

        #[test]
        fn physicality_preserved(ch in arb_channel(), seed in any::<u64>(), r in 0.0f64..2.0) {
            let g = apply_passive(
                &squeezed_diag_cm(&SqueezingSpectrum::new(vec![r, 0.3]).unwrap()),
                &random_passive_symplectic(2, seed).unwrap(),
            ).unwrap();
            let out = ch.apply_to_cm(&g);
            prop_assert!(symplectic_eigenvalues(&out).unwrap()[0] >= 0.5 - 1e-9);
        }

        #[test]
        fn unit_gain_is_identity(n_th in 0.0f64..10.0) {
            prop_assert_eq!(PhaseInsensitiveChannel::from_loss(1.0, n_th).unwrap(), PhaseInsensitiveChannel::identity());
            prop_assert_eq!(PhaseInsensitiveChannel::from_amplifier(1.0, n_th).unwrap(), PhaseInsensitiveChannel::identity());
        }
    }
}
