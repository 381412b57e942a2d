//! Closed-form single-channel capacities: coherent-state/heterodyne,
//! squeezed-state/homodyne, and the Holevo bound, plus the efficiency maps
//! built from them.

use serde::{Deserialize, Serialize};

use crate::channel::PhaseInsensitiveChannel;
use crate::error::{invalid, Error, Result};
use crate::par::{map_range, Execution};

/// Entropy (bits) of a thermal state with mean photon number `x`.
///
/// Written as `log2(1+x) + x log2(1 + 1/x)` to avoid cancelling two large
/// terms; the second term vanishes for `x < 1e-300`.
pub fn g_entropy(x: f64) -> f64 {
    let tail = if x < 1e-300 { 0.0 } else { x * x.recip().ln_1p() };
    (x.ln_1p() + tail) / std::f64::consts::LN_2
}

/// `log2(1 + 2 tau n / (1 + tau + 2m))`.
pub fn coherent_capacity(ch: &PhaseInsensitiveChannel, n_bar: f64) -> f64 {
    let (tau, m) = (ch.tau(), ch.m());
    (2.0 * tau * n_bar / (1.0 + tau + 2.0 * m)).ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedCapacity {
    pub bits: f64,
    /// Optimal input squeezing `r`.
    pub r: f64,
}

/// Squeezed-state scheme with homodyne detection at optimal squeezing.
///
/// The optimal `exp(2r) = (-tau + sqrt(8 tau m n + (tau + 2m)^2)) / (2m)` is
/// evaluated in the rationalized form
/// `(4 tau n + 2 tau + 2m) / (tau + sqrt(...))`, which is finite at `m = 0`
/// and reduces there to the ideal-channel limit `1 + 2n`.
pub fn squeezed_capacity(ch: &PhaseInsensitiveChannel, n_bar: f64) -> SqueezedCapacity {
    let (tau, m) = (ch.tau(), ch.m());
    let root = (8.0 * tau * m * n_bar + (tau + 2.0 * m).powi(2)).sqrt();
    let e2r = (4.0 * tau * n_bar + 2.0 * tau + 2.0 * m) / (tau + root);
    SqueezedCapacity {
        bits: e2r.log2().max(0.0),
        r: 0.5 * e2r.ln().max(0.0),
    }
}

/// `g(tau n + m + (tau-1)/2) - g(m + (tau-1)/2)`.
pub fn holevo_capacity(ch: &PhaseInsensitiveChannel, n_bar: f64) -> Result<f64> {
    let floor = ch.output_vacuum_noise();
    if floor < -1e-12 {
        return Err(Error::Unphysical(format!(
            "m + (tau-1)/2 = {floor} is negative"
        )));
    }
    let floor = floor.max(0.0);
    Ok((g_entropy(ch.tau() * n_bar + floor) - g_entropy(floor)).max(0.0))
}

/// Input energy at which coherent and squeezed schemes tie,
/// `(1 + 2m + tau) / (2 m tau)`; infinite for a noiseless channel.
pub fn crossover_energy(ch: &PhaseInsensitiveChannel) -> f64 {
    let (tau, m) = (ch.tau(), ch.m());
    if m <= 0.0 {
        return f64::INFINITY;
    }
    (1.0 + 2.0 * m + tau) / (2.0 * m * tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Coherent,
    Squeezed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub c_coh: f64,
    pub c_sq: f64,
    pub c_holevo: f64,
    pub c_gauss: f64,
    pub optimal_scheme: Scheme,
    pub optimal_squeezing_r: f64,
    pub efficiency: f64,
}

pub fn capacity_report(ch: &PhaseInsensitiveChannel, n_bar: f64) -> Result<CapacityReport> {
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return Err(invalid(format!("mean photon number {n_bar} must be >= 0")));
    }
    let c_coh = coherent_capacity(ch, n_bar);
    let sq = squeezed_capacity(ch, n_bar);
    let c_holevo = holevo_capacity(ch, n_bar)?;
    let (c_gauss, optimal_scheme, r) = if sq.bits > c_coh {
        (sq.bits, Scheme::Squeezed, sq.r)
    } else {
        (c_coh, Scheme::Coherent, 0.0)
    };
    let efficiency = if c_holevo > 0.0 { c_gauss / c_holevo } else { 1.0 };
    Ok(CapacityReport {
        c_coh,
        c_sq: sq.bits,
        c_holevo,
        c_gauss,
        optimal_scheme,
        optimal_squeezing_r: r,
        efficiency,
    })
}

/// Channel family swept against thermal noise: loss or amplification with a
/// fixed transmittance/gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "tau", rename_all = "lowercase")]
pub enum ChannelFamily {
    Loss(f64),
    Amplifier(f64),
}

impl ChannelFamily {
    /// Loss for `tau <= 1`, amplifier otherwise.
    pub fn from_tau(tau: f64) -> Self {
        if tau <= 1.0 {
            ChannelFamily::Loss(tau)
        } else {
            ChannelFamily::Amplifier(tau)
        }
    }

    pub fn tau(&self) -> f64 {
        match *self {
            ChannelFamily::Loss(t) | ChannelFamily::Amplifier(t) => t,
        }
    }

    pub fn channel(&self, n_th: f64) -> Result<PhaseInsensitiveChannel> {
        match *self {
            ChannelFamily::Loss(eta) => PhaseInsensitiveChannel::from_loss(eta, n_th),
            ChannelFamily::Amplifier(g) => PhaseInsensitiveChannel::from_amplifier(g, n_th),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    #[default]
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
}

impl AxisRange {
    pub fn new(min: f64, max: f64) -> Self {
        AxisRange { min, max }
    }

    pub fn points(&self, resolution: usize, spacing: Spacing) -> Result<Vec<f64>> {
        if resolution < 2 {
            return Err(invalid("grid resolution must be >= 2"));
        }
        if !(self.min > 0.0 && self.max > self.min) || !self.max.is_finite() {
            return Err(invalid(format!(
                "range [{}, {}] must be positive and nonempty",
                self.min, self.max
            )));
        }
        let last = (resolution - 1) as f64;
        Ok((0..resolution)
            .map(|i| {
                let t = i as f64 / last;
                match spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n_bar: f64,
    pub n_th: f64,
    pub tau: f64,
    pub m: f64,
    pub n_bar_crossover: f64,
    pub report: CapacityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyGrid {
    pub family: ChannelFamily,
    pub n_bar: Vec<f64>,
    pub n_th: Vec<f64>,
    /// Row-major: `cells[i * n_bar.len() + j]` is `(n_th[i], n_bar[j])`.
    pub cells: Vec<GridCell>,
    /// Coherent/squeezed boundary `(n_th, n_bar_c(n_th))`.
    pub crossover: Vec<(f64, f64)>,
}

impl EfficiencyGrid {
    pub fn cell(&self, i_nth: usize, j_nbar: usize) -> &GridCell {
        &self.cells[i_nth * self.n_bar.len() + j_nbar]
    }
}

pub fn efficiency_grid(
    family: ChannelFamily,
    n_bar_range: AxisRange,
    n_th_range: AxisRange,
    resolution: usize,
    spacing: Spacing,
    exec: Execution,
) -> Result<EfficiencyGrid> {
    let n_bar = n_bar_range.points(resolution, spacing)?;
    let n_th = n_th_range.points(resolution, spacing)?;
    let channels = n_th
        .iter()
        .map(|&t| family.channel(t))
        .collect::<Result<Vec<_>>>()?;
    let cols = n_bar.len();
    let cells = map_range(exec, n_th.len() * cols, |k| {
        let (i, j) = (k / cols, k % cols);
        let ch = &channels[i];
        capacity_report(ch, n_bar[j]).map(|report| GridCell {
            n_bar: n_bar[j],
            n_th: n_th[i],
            tau: ch.tau(),
            m: ch.m(),
            n_bar_crossover: crossover_energy(ch),
            report,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let crossover = n_th
        .iter()
        .zip(&channels)
        .map(|(&t, ch)| (t, crossover_energy(ch)))
        .collect();
    Ok(EfficiencyGrid {
        family,
        n_bar,
        n_th,
        cells,
        crossover,
    })
}

/// Ratio of the pure-loss coherent capacity to the Holevo bound as a
/// function of the received energy `x = tau n`.
pub fn pure_loss_efficiency(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2 / g_entropy(x)
}

const THRESHOLD_LO: f64 = 1e-6;
const THRESHOLD_HI: f64 = 1e9;

/// Received energy `tau n` needed for the coherent scheme to reach a given
/// fraction of the Holevo bound under pure loss.
pub fn threshold_energy(target_efficiency: f64) -> Result<f64> {
    if !(target_efficiency > 0.0 && target_efficiency < 1.0) {
        return Err(invalid(format!(
            "target efficiency {target_efficiency} outside (0, 1)"
        )));
    }
    let (ln_lo, ln_hi) = (THRESHOLD_LO.ln(), THRESHOLD_HI.ln());
    let probe: Vec<f64> = (0..=400)
        .map(|i| pure_loss_efficiency((ln_lo + (ln_hi - ln_lo) * i as f64 / 400.0).exp()))
        .collect();
    if probe.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Bracket("efficiency ratio is not monotone on the bracket".into()));
    }
    let f = |ln_x: f64| pure_loss_efficiency(ln_x.exp()) - target_efficiency;
    let (mut a, mut b) = (ln_lo, ln_hi);
    if f(a) > 0.0 || f(b) < 0.0 {
        return Err(Error::Bracket(format!(
            "target {target_efficiency} not attained on [{THRESHOLD_LO:e}, {THRESHOLD_HI:e}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ch(tau: f64, m: f64) -> PhaseInsensitiveChannel {
        PhaseInsensitiveChannel::new(tau, m).unwrap()
    }

    #[test]
    fn thermal_entropy() {
        assert_eq!(g_entropy(0.0), 0.0);
        assert_abs_diff_eq!(g_entropy(1.0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g_entropy(3.0), 4.0 * 2.0 - 3.0 * 3f64.log2(), epsilon = 1e-14);
        // g(n) ~ log2(e (n + 1/2)) for large n
        assert!((g_entropy(1e6) - (std::f64::consts::E * (1e6 + 0.5)).log2()).abs() < 1e-10);
    }

    #[test]
    fn coherent() {
        assert_eq!(coherent_capacity(&ch(0.3, 2.0), 0.0), 0.0);
        assert_abs_diff_eq!(coherent_capacity(&ch(0.5, 0.25), 2.0), 1.0, epsilon = 1e-15);
        for eta in [0.1, 0.5, 0.9, 1.0] {
            let c = PhaseInsensitiveChannel::from_loss(eta, 0.0).unwrap();
            for n in [0.01, 1.0, 37.0] {
                assert_abs_diff_eq!(coherent_capacity(&c, n), (1.0 + eta * n).log2(), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn squeezed() {
        let s = squeezed_capacity(&ch(1.0, 0.0), 1.0);
        assert_abs_diff_eq!(s.bits, 3f64.log2(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.r, 0.5 * 3f64.ln(), epsilon = 1e-14);

        let s = squeezed_capacity(&ch(0.5, 0.25), 1.0);
        let raw = ((-0.5 + 2f64.sqrt()) / 0.5).log2();
        assert_abs_diff_eq!(s.bits, raw, epsilon = 1e-14);
        assert_abs_diff_eq!(s.bits, 0.870_60, epsilon = 1e-5);

        let s = squeezed_capacity(&ch(0.5, 0.25), 8.0);
        assert_abs_diff_eq!(s.bits, 5f64.log2(), epsilon = 1e-14);

        assert_eq!(squeezed_capacity(&ch(0.7, 0.45), 0.0).bits, 0.0);
        for n in [0.1, 1.0, 10.0] {
            let s = squeezed_capacity(&ch(1.0, 1e-8), n);
            assert!((s.bits - (1.0 + 2.0 * n).log2()).abs() < 1e-5);
        }
    }

    #[test]
    fn holevo() {
        let pl = PhaseInsensitiveChannel::from_loss(0.5, 0.0).unwrap();
        assert_abs_diff_eq!(holevo_capacity(&pl, 2.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(holevo_capacity(&ch(1.5, 0.9), 0.0).unwrap(), 0.0);
        let id = PhaseInsensitiveChannel::identity();
        let x = 52.0;
        assert_abs_diff_eq!(holevo_capacity(&id, x).unwrap(), 7.156, epsilon = 1e-3);
        assert_abs_diff_eq!(pure_loss_efficiency(x), 0.800, epsilon = 1e-3);
    }

    #[test]
    fn crossover() {
        assert_abs_diff_eq!(crossover_energy(&ch(0.5, 0.25)), 8.0, epsilon = 1e-15);
        assert_eq!(crossover_energy(&ch(1.0, 0.0)), f64::INFINITY);
    }

    #[test]
    fn thresholds() {
        let x80 = threshold_energy(0.8).unwrap();
        assert!((x80 - 52.0).abs() <= 1.0, "{x80}");
        let x90 = threshold_energy(0.9).unwrap();
        assert!((x90 - 8098.0).abs() <= 0.02 * 8098.0, "{x90}");
        assert!(threshold_energy(0.5).unwrap() < 52.0);
        assert!(threshold_energy(0.0).is_err());
        assert!(threshold_energy(1.0).is_err());
    }

    #[test]
    fn report_and_grid() {
        let r = capacity_report(&ch(0.5, 0.25), 0.0).unwrap();
        assert_eq!(r.efficiency, 1.0);
        assert!(capacity_report(&ch(0.5, 0.25), -1.0).is_err());

        let grid = efficiency_grid(
            ChannelFamily::Loss(0.7),
            AxisRange::new(0.01, 100.0),
            AxisRange::new(0.01, 10.0),
            12,
            Spacing::Log,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(grid.cells.len(), 144);
        let c = grid.cell(3, 5);
        assert_eq!((c.n_th, c.n_bar), (grid.n_th[3], grid.n_bar[5]));
        assert_eq!(grid.crossover.len(), 12);
        let par = efficiency_grid(
            ChannelFamily::Loss(0.7),
            AxisRange::new(0.01, 100.0),
            AxisRange::new(0.01, 10.0),
            12,
            Spacing::Log,
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(grid, par);
        assert!(AxisRange::new(1.0, 1.0).points(4, Spacing::Linear).is_err());
        assert!(AxisRange::new(0.0, 1.0).points(4, Spacing::Log).is_err());
        assert!(AxisRange::new(0.5, 1.0).points(1, Spacing::Log).is_err());
    }

    fn arb_channel() -> impl Strategy<Value = PhaseInsensitiveChannel> {
        (0.05f64..3.0, 0.0f64..4.0).prop_map(|(tau, extra)| {
            PhaseInsensitiveChannel::new(tau, crate::channel::min_noise(tau) + extra).unwrap()
        })
    }

    proptest! {
        #[test]
        fn gaussian_below_holevo(c in arb_channel(), n in 0.0f64..200.0) {
            let r = capacity_report(&c, n).unwrap();
            prop_assert!(r.c_gauss <= r.c_holevo + 1e-9);
            prop_assert!(r.efficiency <= 1.0 + 1e-9);
            prop_assert_eq!(r.c_gauss, r.c_coh.max(r.c_sq));
            let sq = squeezed_capacity(&c, n);
            prop_assert!(sq.r.sinh().powi(2) <= n + 1e-9);
        }

        #[test]
        fn monotone_in_energy(c in arb_channel(), n in 0.0f64..50.0, dn in 1e-3f64..5.0) {
            let a = capacity_report(&c, n).unwrap();
            let b = capacity_report(&c, n + dn).unwrap();
            prop_assert!(b.c_coh >= a.c_coh);
            prop_assert!(b.c_sq >= a.c_sq);
            prop_assert!(b.c_holevo >= a.c_holevo - 1e-12);
        }

        #[test]
        fn crossover_sides(c in arb_channel()) {
            prop_assume!(c.m() > 1e-3);
            let nc = crossover_energy(&c);
            let at = capacity_report(&c, nc).unwrap();
            prop_assert!((at.c_coh - at.c_sq).abs() < 1e-9);
            let above = capacity_report(&c, nc * 1.5).unwrap();
            prop_assert!(above.c_coh > above.c_sq);
            let below = capacity_report(&c, nc * 0.5).unwrap();
            prop_assert!(below.c_sq > below.c_coh);
        }
    }
}
