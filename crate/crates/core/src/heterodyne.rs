//! Mutual information of QAM input with heterodyne detection.
//!
//! For a coherent state with amplitude `beta` the heterodyne outcome is
//! Gaussian around `sqrt(2) (Re beta, Im beta)` with variance `v` per axis
//! (`v = 1` after pure loss: half from the state, half from the
//! measurement). The output is a Gaussian mixture, and
//! `I = H(B) - log2(2 pi e v)`.
//!
//! `H(B)` is integrated with composite Gauss-Legendre rules on a box
//! covering all centres plus 8 standard deviations. On a square lattice the
//! density factorizes as `Fx^T P Fy` with `sqrt(M)` levels per axis, so each
//! rule costs one small matrix product.

use std::f64::consts::{E, LN_2, PI, SQRT_2};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::capacity::coherent_capacity;
use crate::channel::PhaseInsensitiveChannel;
use crate::constellation::{build_qam, solve_delta_for_energy, Alphabet, QamConstellation};
use crate::error::{invalid, Error, Result};
use crate::par::{map_range, Execution};

/// Output mixture: centres `(xs[j], ys[k])` with weight `joint[(j, k)]`,
/// each an isotropic Gaussian of per-axis variance `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterodyneModel {
    xs: Vec<f64>,
    ys: Vec<f64>,
    joint: DMatrix<f64>,
    v: f64,
}

impl HeterodyneModel {
    /// Received square-lattice constellation; uses the `sqrt(M)`-level
    /// factorization.
    pub fn from_qam(constellation: &QamConstellation, v: f64) -> Result<Self> {
        check_variance(v)?;
        let side = constellation.order().side();
        let levels: Vec<f64> = constellation.axis_levels().iter().map(|l| SQRT_2 * l).collect();
        let mut joint = DMatrix::zeros(side, side);
        for (&(ix, iy), p) in constellation.lattice_indices().iter().zip(constellation.prior()) {
            joint[(ix, iy)] += p;
        }
        Ok(HeterodyneModel {
            xs: levels.clone(),
            ys: levels,
            joint,
            v,
        })
    }

    /// Arbitrary received alphabet.
    pub fn from_alphabet(alphabet: &Alphabet, v: f64) -> Result<Self> {
        check_variance(v)?;
        let xs = alphabet.points().iter().map(|z| SQRT_2 * z.re).collect();
        let ys = alphabet.points().iter().map(|z| SQRT_2 * z.im).collect();
        let joint = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(alphabet.prior()));
        Ok(HeterodyneModel { xs, ys, joint, v })
    }

    /// Coherent states after pure loss (`v = 1`).
    pub fn pure_loss(constellation: &QamConstellation) -> Self {
        HeterodyneModel::from_qam(constellation, 1.0).expect("unit variance is valid")
    }

    pub fn variance(&self) -> f64 {
        self.v
    }

    /// `log2(2 pi e v)`.
    pub fn conditional_entropy_bits(&self) -> f64 {
        (2.0 * PI * E * self.v).log2()
    }
}

fn check_variance(v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("output variance {v} must be positive")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Nodes per panel.
    pub order: usize,
    /// Initial panel width in units of `sqrt(v)`.
    pub panel_width: f64,
    /// Box margin beyond the outermost centres, in units of `sqrt(v)`.
    pub tail: f64,
    /// Accept when two successive halvings of the panel width agree to
    /// within this many bits.
    pub tol_bits: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            order: 12,
            panel_width: 1.0,
            tail: 8.0,
            tol_bits: 1e-9,
            max_refinements: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeterodyneMi {
    pub bits: f64,
    pub output_entropy_bits: f64,
    /// Panels per axis in the accepted rule.
    pub panels: usize,
    /// Difference to the previous (coarser) rule.
    pub change_bits: f64,
}

fn axis_rule(lo: f64, hi: f64, panels: usize, base: &GaussLegendre) -> (Vec<f64>, Vec<f64>) {
    let h = (hi - lo) / panels as f64;
    let pairs = base.as_node_weight_pairs();
    let mut nodes = Vec::with_capacity(panels * pairs.len());
    let mut weights = Vec::with_capacity(panels * pairs.len());
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (x, w) in pairs {
            nodes.push(a + 0.5 * h * (x + 1.0));
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

fn axis_matrix(nodes: &[f64], centres: &[f64], v: f64) -> DMatrix<f64> {
    let norm = 1.0 / (2.0 * PI * v).sqrt();
    DMatrix::from_fn(nodes.len(), centres.len(), |a, j| {
        let d = nodes[a] - centres[j];
        norm * (-d * d / (2.0 * v)).exp()
    })
}

fn axis_box(centres: &[f64], margin: f64) -> (f64, f64) {
    let lo = centres.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = centres.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo - margin, hi + margin)
}

pub fn heterodyne_mi(model: &HeterodyneModel) -> Result<f64> {
    heterodyne_mi_with(model, &QuadratureSettings::default()).map(|r| r.bits)
}

/// Mutual information with explicit quadrature settings; halves the panel
/// width until two rules agree within `tol_bits`.
pub fn heterodyne_mi_with(model: &HeterodyneModel, settings: &QuadratureSettings) -> Result<HeterodyneMi> {
    let order = NonZeroUsize::new(settings.order).ok_or_else(|| invalid("quadrature order must be positive"))?;
    if !(settings.panel_width > 0.0 && settings.tail > 0.0 && settings.tol_bits > 0.0) {
        return Err(invalid("quadrature widths and tolerance must be positive"));
    }
    let sd = model.v.sqrt();
    let (x_lo, x_hi) = axis_box(&model.xs, settings.tail * sd);
    let (y_lo, y_hi) = axis_box(&model.ys, settings.tail * sd);
    let base = GaussLegendre::new(order);
    let width = settings.panel_width * sd;
    let mut x_panels = ((x_hi - x_lo) / width).ceil().max(1.0) as usize;
    let mut y_panels = ((y_hi - y_lo) / width).ceil().max(1.0) as usize;
    let h_cond = model.conditional_entropy_bits();
    let eval = |x_panels: usize, y_panels: usize| {
        let (xn, xw) = axis_rule(x_lo, x_hi, x_panels, &base);
        let (yn, yw) = axis_rule(y_lo, y_hi, y_panels, &base);
        let density = axis_matrix(&xn, &model.xs, model.v) * &model.joint * axis_matrix(&yn, &model.ys, model.v).transpose();
        let mut h = 0.0;
        for (b, wb) in yw.iter().enumerate() {
            for (a, wa) in xw.iter().enumerate() {
                let p = density[(a, b)];
                if p > 0.0 {
                    h -= wa * wb * p * p.ln();
                }
            }
        }
        h / LN_2
    };
    let mut prev = eval(x_panels, y_panels);
    for _ in 0..settings.max_refinements {
        x_panels *= 2;
        y_panels *= 2;
        let h = eval(x_panels, y_panels);
        let change = (h - prev).abs();
        if !h.is_finite() {
            return Err(Error::NonFinite("heterodyne output entropy".into()));
        }
        if change <= settings.tol_bits {
            return Ok(HeterodyneMi {
                bits: (h - h_cond).max(0.0),
                output_entropy_bits: h,
                panels: x_panels.max(y_panels),
                change_bits: change,
            });
        }
        prev = h;
    }
    Err(Error::Quadrature(format!(
        "output entropy not converged to {} bits after {} refinements",
        settings.tol_bits, settings.max_refinements
    )))
}

/// One row of a heterodyne curve. `sigma` is the transmitted prior
/// deviation (infinite for uniform); the received one is `sqrt(eta) sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeterodynePoint {
    pub order: usize,
    pub eta: f64,
    pub sigma: f64,
    pub delta: f64,
    pub n_bar: f64,
    pub i_bits: f64,
    pub c_coh: f64,
    /// `eta n_bar >= sigma'^2`, i.e. `n_bar >= sigma^2`.
    pub past_marker: bool,
}

/// Rows for every `(sigma, n_bar)` pair, row-major in `sigma`.
pub fn heterodyne_curve(
    order: usize,
    eta: f64,
    sigmas: &[f64],
    n_bars: &[f64],
    exec: Execution,
) -> Result<Vec<HeterodynePoint>> {
    if sigmas.is_empty() || n_bars.is_empty() {
        return Err(invalid("curve needs at least one sigma and one n_bar"));
    }
    let channel = PhaseInsensitiveChannel::from_loss(eta, 0.0)?;
    let nn = n_bars.len();
    map_range(exec, sigmas.len() * nn, |idx| {
        let (sigma, n_bar) = (sigmas[idx / nn], n_bars[idx % nn]);
        let delta = solve_delta_for_energy(order, sigma, n_bar)?;
        let rx = build_qam(order, delta, sigma)?.propagate(eta)?;
        let i_bits = heterodyne_mi(&HeterodyneModel::pure_loss(&rx))?;
        Ok(HeterodynePoint {
            order,
            eta,
            sigma,
            delta,
            n_bar,
            i_bits,
            c_coh: coherent_capacity(&channel, n_bar),
            past_marker: n_bar >= sigma * sigma,
        })
    })
    .into_iter()
    .collect()
}
