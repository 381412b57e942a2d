//! Adaptive displacement receiver with on-off detection.
//!
//! The received coherent state is split into `L` equal pulses. Before each
//! pulse the receiver nulls its current best hypothesis with a displacement
//! and records click / no-click; the posterior over symbols is updated by
//! Bayes' rule and the next hypothesis is its argmax. The final guess is the
//! argmax of the last posterior.
//!
//! Two routes compute the input/guess statistics: [`exact_joint`]
//! enumerates all `2^L` outcome strings, and [`monte_carlo_confusion`]
//! samples trials. The sampler exploits that a no-click never changes the
//! hypothesis, so the wait until the next click is geometric and can be
//! drawn in one step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::capacity_report;
use crate::channel::PhaseInsensitiveChannel;
use crate::constellation::{build_qam, solve_delta_for_energy, Alphabet, QamOrder};
use crate::error::{invalid, Error, Result};
use crate::par::{map_range, map_slice, Execution};
use crate::rng::{mix_seed, stream_id, task_rng};

/// Largest `L` accepted by the exact enumeration.
pub const MAX_EXACT_STAGES: usize = 16;
/// Floor applied to posterior entries that underflow on an allowed outcome.
pub const POSTERIOR_FLOOR: f64 = 1e-300;
const TIE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub efficiency: f64,
    pub dark_count_prob: f64,
}

impl Default for Detector {
    fn default() -> Self {
        Detector {
            efficiency: 1.0,
            dark_count_prob: 0.0,
        }
    }
}

impl Detector {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(invalid(format!("detector efficiency {} outside (0, 1]", self.efficiency)));
        }
        if !(self.dark_count_prob >= 0.0 && self.dark_count_prob < 1.0) {
            return Err(invalid(format!("dark count probability {} outside [0, 1)", self.dark_count_prob)));
        }
        Ok(())
    }
}

/// Probability of no click when a pulse carrying `1/L` of amplitude
/// `true_amp` is displaced by `-hyp_amp / sqrt(L)`.
pub fn stage_no_click_prob(
    true_amp: num_complex::Complex64,
    hyp_amp: num_complex::Complex64,
    stages: usize,
    detector: &Detector,
) -> f64 {
    (-detector.efficiency * (true_amp - hyp_amp).norm_sqr() / stages as f64).exp()
        * (1.0 - detector.dark_count_prob)
}

/// Receiver setup. The alphabet is the one arriving at the receiver, i.e.
/// after channel loss.
#[derive(Debug, Clone)]
pub struct ReceiverConfig {
    stages: usize,
    alphabet: Alphabet,
    detector: Detector,
    /// `no_click[h * M + i]`: no-click probability for hypothesis `h` and
    /// true symbol `i`.
    no_click: Vec<f64>,
}

impl ReceiverConfig {
    pub fn new(alphabet: Alphabet, stages: usize, detector: Detector) -> Result<Self> {
        if stages == 0 {
            return Err(invalid("receiver needs at least one stage"));
        }
        detector.validate()?;
        let m = alphabet.len();
        let pts = alphabet.points();
        let mut no_click = vec![0.0; m * m];
        for h in 0..m {
            for i in 0..m {
                no_click[h * m + i] = stage_no_click_prob(pts[i], pts[h], stages, &detector);
            }
        }
        Ok(ReceiverConfig {
            stages,
            alphabet,
            detector,
            no_click,
        })
    }

    pub fn ideal(alphabet: Alphabet, stages: usize) -> Result<Self> {
        ReceiverConfig::new(alphabet, stages, Detector::default())
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn detector(&self) -> &Detector {
        &self.detector
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    fn no_click_row(&self, hyp: usize) -> &[f64] {
        let m = self.size();
        &self.no_click[hyp * m..(hyp + 1) * m]
    }
}

/// Index of the largest entry; entries within a relative `1e-12` of the
/// maximum tie and the lowest index wins.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = max - TIE_RTOL * max.abs();
    values.iter().position(|v| *v >= cut).unwrap_or(0)
}

/// Multiplies by the likelihood, floors underflowed entries of allowed
/// symbols and renormalizes. Returns false if every entry vanished, in
/// which case `posterior` is left unchanged.
fn reweight(posterior: &mut [f64], likelihood: impl Fn(usize) -> f64) -> bool {
    let weight = |i: usize, p: f64| {
        let l = likelihood(i);
        let v = p * l;
        if v < POSTERIOR_FLOOR && l > 0.0 {
            v.max(p.min(POSTERIOR_FLOOR))
        } else {
            v
        }
    };
    let total: f64 = posterior.iter().enumerate().map(|(i, p)| weight(i, *p)).sum();
    if !(total > 0.0) {
        return false;
    }
    for (i, p) in posterior.iter_mut().enumerate() {
        *p = weight(i, *p) / total;
    }
    true
}

/// Posterior after observing `click` with hypothesis `hyp` nulled.
pub fn bayesian_update(posterior: &[f64], hyp: usize, click: bool, config: &ReceiverConfig) -> Result<Vec<f64>> {
    if posterior.len() != config.size() {
        return Err(Error::DimensionMismatch {
            expected: config.size(),
            actual: posterior.len(),
        });
    }
    if hyp >= config.size() {
        return Err(invalid(format!("hypothesis {hyp} out of range")));
    }
    let row = config.no_click_row(hyp);
    let mut next = posterior.to_vec();
    reweight(&mut next, |i| if click { 1.0 - row[i] } else { row[i] });
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    /// `true` = click.
    pub outcomes: Vec<bool>,
    /// Hypothesis nulled before each stage.
    pub hypotheses: Vec<usize>,
    pub guess: usize,
    /// Probability of this outcome string given the input; filled by the
    /// exact enumeration only.
    pub probability: Option<f64>,
}

/// Simulates one transmission of symbol `input`, stage by stage.
pub fn run_trial<R: Rng + ?Sized>(input: usize, config: &ReceiverConfig, rng: &mut R) -> Result<DetectionRecord> {
    if input >= config.size() {
        return Err(invalid(format!("input symbol {input} out of range")));
    }
    let mut posterior = config.alphabet.prior().to_vec();
    let mut outcomes = Vec::with_capacity(config.stages);
    let mut hypotheses = Vec::with_capacity(config.stages);
    for _ in 0..config.stages {
        let hyp = argmax_lowest(&posterior);
        let row = config.no_click_row(hyp);
        let click = rng.random::<f64>() >= row[input];
        reweight(&mut posterior, |i| if click { 1.0 - row[i] } else { row[i] });
        outcomes.push(click);
        hypotheses.push(hyp);
    }
    Ok(DetectionRecord {
        outcomes,
        hypotheses,
        guess: argmax_lowest(&posterior),
        probability: None,
    })
}

/// Row-stochastic `P(guess = b | input = a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    size: usize,
    probs: Vec<f64>,
    /// Trials per input row (Monte-Carlo estimates only).
    trials: Option<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_probabilities(size: usize, probs: Vec<f64>) -> Result<Self> {
        if size == 0 || probs.len() != size * size {
            return Err(invalid("confusion matrix must be M x M"));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid("confusion entries must be finite and >= 0"));
        }
        Ok(ConfusionMatrix {
            size,
            probs,
            trials: None,
        })
    }

    pub fn from_counts(size: usize, counts: &[u64]) -> Result<Self> {
        if size == 0 || counts.len() != size * size {
            return Err(invalid("count matrix must be M x M"));
        }
        let mut probs = vec![0.0; size * size];
        let mut trials = vec![0; size];
        for a in 0..size {
            let row = &counts[a * size..(a + 1) * size];
            let n: u64 = row.iter().sum();
            trials[a] = n;
            if n > 0 {
                for b in 0..size {
                    probs[a * size + b] = row[b] as f64 / n as f64;
                }
            }
        }
        Ok(ConfusionMatrix {
            size,
            probs,
            trials: Some(trials),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, input: usize, guess: usize) -> f64 {
        self.probs[input * self.size + guess]
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.probs[input * self.size..(input + 1) * self.size]
    }

    pub fn trials(&self) -> Option<&[u64]> {
        self.trials.as_deref()
    }

    /// Binomial standard error `sqrt(p (1 - p) / n)` of an MC entry.
    pub fn std_error(&self, input: usize, guess: usize) -> Option<f64> {
        let n = *self.trials.as_ref()?.get(input)?;
        if n == 0 {
            return None;
        }
        let p = self.get(input, guess);
        Some((p * (1.0 - p) / n as f64).sqrt())
    }

    pub fn mean_std_error(&self) -> Option<f64> {
        let mut acc = 0.0;
        for a in 0..self.size {
            for b in 0..self.size {
                acc += self.std_error(a, b)?;
            }
        }
        Some(acc / (self.size * self.size) as f64)
    }

    /// Probability of a correct guess under `prior`.
    pub fn success_probability(&self, prior: &[f64]) -> f64 {
        prior.iter().enumerate().map(|(a, p)| p * self.get(a, a)).sum()
    }
}

/// `I(A; B) = sum_a sum_b p_a P(b|a) log2(P(b|a) / P(b))`, with `0 log 0 = 0`.
pub fn discrete_mutual_information(prior: &[f64], confusion: &ConfusionMatrix) -> Result<f64> {
    let m = confusion.size();
    if prior.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: prior.len(),
        });
    }
    let total: f64 = prior.iter().sum();
    if prior.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(invalid("prior must be a probability vector"));
    }
    let mut marginal = vec![0.0; m];
    for (a, &pa) in prior.iter().enumerate() {
        for (mb, &p) in marginal.iter_mut().zip(confusion.row(a)) {
            *mb += pa * p;
        }
    }
    let mut info = 0.0;
    for (a, &pa) in prior.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        for (&p, &mb) in confusion.row(a).iter().zip(&marginal) {
            if p > 0.0 && mb > 0.0 {
                // log difference: p / marginal overflows for subnormal priors
                info += pa * p * (p.log2() - mb.log2());
            }
        }
    }
    Ok(info.max(0.0))
}

/// Shannon entropy in bits.
pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|x| **x > 0.0).map(|x| x * x.log2()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactJoint {
    pub confusion: ConfusionMatrix,
    /// `I(input; guess)`.
    pub guess_information_bits: f64,
    /// `I(input; full outcome string)`, an upper bound on the above.
    pub record_information_bits: f64,
}

/// Outcomes, hypotheses, guess and per-input path probabilities of one leaf.
type Leaf = (Vec<bool>, Vec<usize>, usize, Vec<f64>);

struct Enumeration<'a> {
    config: &'a ReceiverConfig,
    confusion: Vec<f64>,
    record_info: f64,
    leaves: Option<Vec<Leaf>>,
}

impl Enumeration<'_> {
    fn descend(&mut self, posterior: &[f64], path_probs: &[f64], outcomes: &mut Vec<bool>, hyps: &mut Vec<usize>) {
        let cfg = self.config;
        let m = cfg.size();
        if outcomes.len() == cfg.stages {
            let guess = argmax_lowest(posterior);
            let prior = cfg.alphabet.prior();
            let p_string: f64 = (0..m).map(|a| prior[a] * path_probs[a]).sum();
            for a in 0..m {
                self.confusion[a * m + guess] += path_probs[a];
                let joint = prior[a] * path_probs[a];
                if joint > 0.0 {
                    self.record_info += joint * (path_probs[a].log2() - p_string.log2());
                }
            }
            if let Some(leaves) = &mut self.leaves {
                leaves.push((outcomes.clone(), hyps.clone(), guess, path_probs.to_vec()));
            }
            return;
        }
        let hyp = argmax_lowest(posterior);
        let row = cfg.no_click_row(hyp);
        for click in [false, true] {
            let lik = |i: usize| if click { 1.0 - row[i] } else { row[i] };
            let next_probs: Vec<f64> = (0..m).map(|a| path_probs[a] * lik(a)).collect();
            if next_probs.iter().all(|p| *p == 0.0) {
                continue;
            }
            let mut next_post = posterior.to_vec();
            reweight(&mut next_post, lik);
            outcomes.push(click);
            hyps.push(hyp);
            self.descend(&next_post, &next_probs, outcomes, hyps);
            outcomes.pop();
            hyps.pop();
        }
    }
}

fn enumerate(config: &ReceiverConfig, keep_leaves: bool) -> Result<Enumeration<'_>> {
    if config.stages > MAX_EXACT_STAGES {
        return Err(invalid(format!(
            "exact enumeration supports L <= {MAX_EXACT_STAGES}, got {}",
            config.stages
        )));
    }
    let m = config.size();
    let mut e = Enumeration {
        config,
        confusion: vec![0.0; m * m],
        record_info: 0.0,
        leaves: keep_leaves.then(Vec::new),
    };
    let prior = config.alphabet.prior().to_vec();
    e.descend(&prior, &vec![1.0; m], &mut Vec::new(), &mut Vec::new());
    Ok(e)
}

/// Exact confusion matrix by enumerating every outcome string. Along a
/// string the hypotheses are fixed, so `P(string | input)` is a product of
/// stage probabilities.
pub fn exact_joint(config: &ReceiverConfig) -> Result<ExactJoint> {
    let e = enumerate(config, false)?;
    let confusion = ConfusionMatrix::from_probabilities(config.size(), e.confusion)?;
    let guess_information_bits = discrete_mutual_information(config.alphabet.prior(), &confusion)?;
    Ok(ExactJoint {
        confusion,
        guess_information_bits,
        record_information_bits: e.record_info.max(0.0),
    })
}

/// Every outcome string with nonzero probability for some input, with
/// `probability` set to `P(string | input)`.
pub fn exact_outcome_table(config: &ReceiverConfig, input: usize) -> Result<Vec<DetectionRecord>> {
    if input >= config.size() {
        return Err(invalid(format!("input symbol {input} out of range")));
    }
    let e = enumerate(config, true)?;
    Ok(e.leaves
        .unwrap_or_default()
        .into_iter()
        .map(|(outcomes, hypotheses, guess, probs)| DetectionRecord {
            outcomes,
            hypotheses,
            guess,
            probability: Some(probs[input]),
        })
        .collect())
}

/// Receiver tables for the fast sampler: powers of the no-click
/// probabilities for runs of `0..=L` consecutive no-clicks.
struct FastTables<'a> {
    config: &'a ReceiverConfig,
    /// `run[(h * M + i) * (L + 1) + k] = no_click[h][i]^k`.
    run: Vec<f64>,
}

impl<'a> FastTables<'a> {
    fn new(config: &'a ReceiverConfig) -> Self {
        let m = config.size();
        let l = config.stages;
        let mut run = vec![0.0; m * m * (l + 1)];
        for hi in 0..m * m {
            let q = config.no_click[hi];
            let mut acc = 1.0;
            for k in 0..=l {
                run[hi * (l + 1) + k] = acc;
                acc *= q;
            }
        }
        FastTables { config, run }
    }

    fn simulate<R: Rng + ?Sized>(&self, input: usize, posterior: &mut [f64], rng: &mut R) -> usize {
        let cfg = self.config;
        let (m, l) = (cfg.size(), cfg.stages);
        posterior.copy_from_slice(cfg.alphabet.prior());
        let mut stage = 0;
        while stage < l {
            let hyp = argmax_lowest(posterior);
            let row = cfg.no_click_row(hyp);
            let remaining = l - stage;
            let click_p = 1.0 - row[input];
            // no-clicks before the next click
            let quiet = if click_p <= 0.0 {
                remaining
            } else if click_p >= 1.0 {
                0
            } else {
                let u: f64 = rng.random();
                let k = ((1.0 - u).ln() / (-click_p).ln_1p()).floor();
                if k >= remaining as f64 {
                    remaining
                } else {
                    k as usize
                }
            };
            if quiet > 0 {
                let base = hyp * m;
                reweight(posterior, |i| self.run[(base + i) * (l + 1) + quiet]);
                stage += quiet;
            }
            if stage < l {
                reweight(posterior, |i| 1.0 - row[i]);
                stage += 1;
            }
        }
        argmax_lowest(posterior)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfusion {
    pub confusion: ConfusionMatrix,
    /// Plug-in `I(input; guess)` from the pooled frequencies.
    pub mi_plugin: f64,
    /// Grouped-jackknife bias estimate of the plug-in value.
    pub mi_bias: f64,
    /// Jackknife standard error of the MI estimate.
    pub mi_std_error: f64,
    pub groups: usize,
}

impl McConfusion {
    pub fn mi_corrected(&self) -> f64 {
        (self.mi_plugin - self.mi_bias).max(0.0)
    }
}

/// Jackknife groups per symbol; each is an independently seeded batch.
const MC_GROUPS: usize = 20;

/// Monte-Carlo confusion matrix. Trials for symbol `a` are split into
/// batches, batch `g` drawing from stream `(a, g)` of `seed`; the result is
/// identical for any execution mode or thread count.
pub fn monte_carlo_confusion(
    config: &ReceiverConfig,
    trials_per_symbol: u64,
    seed: u64,
    exec: Execution,
) -> Result<McConfusion> {
    if trials_per_symbol < 2 {
        return Err(invalid("need at least two trials per symbol"));
    }
    let m = config.size();
    let groups = MC_GROUPS.min(trials_per_symbol as usize);
    let tables = FastTables::new(config);
    let batch = trials_per_symbol.div_ceil(groups as u64);
    // counts[(a * groups + g) * m + b]
    let per_task = map_range(exec, m * groups, |task| {
        let (a, g) = (task / groups, task % groups);
        let start = g as u64 * batch;
        let n = batch.min(trials_per_symbol.saturating_sub(start));
        let mut rng = task_rng(seed, stream_id(a as u64, g as u64));
        let mut counts = vec![0u64; m];
        let mut posterior = vec![0.0; m];
        for _ in 0..n {
            counts[tables.simulate(a, &mut posterior, &mut rng)] += 1;
        }
        counts
    });
    let prior = config.alphabet.prior();
    let pooled = |skip: Option<usize>| -> Vec<u64> {
        let mut total = vec![0u64; m * m];
        for a in 0..m {
            for g in 0..groups {
                if Some(g) == skip {
                    continue;
                }
                for b in 0..m {
                    total[a * m + b] += per_task[a * groups + g][b];
                }
            }
        }
        total
    };
    let confusion = ConfusionMatrix::from_counts(m, &pooled(None))?;
    let mi_plugin = discrete_mutual_information(prior, &confusion)?;
    let (mi_bias, mi_std_error) = if groups >= 2 {
        let leave_out: Vec<f64> = (0..groups)
            .map(|g| {
                ConfusionMatrix::from_counts(m, &pooled(Some(g)))
                    .and_then(|c| discrete_mutual_information(prior, &c))
            })
            .collect::<Result<_>>()?;
        let gf = groups as f64;
        let mean = leave_out.iter().sum::<f64>() / gf;
        let var = (gf - 1.0) / gf * leave_out.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        ((gf - 1.0) * (mean - mi_plugin), var.sqrt())
    } else {
        (0.0, f64::NAN)
    };
    Ok(McConfusion {
        confusion,
        mi_plugin,
        mi_bias,
        mi_std_error,
        groups,
    })
}

/// How the prior width is chosen at each curve point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SigmaPolicy {
    Uniform,
    Fixed { sigma: f64 },
    Optimize(SigmaSearch),
}

/// Grid scan followed by golden-section refinement between the neighbours
/// of the best grid value. Scan evaluations share one random stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSearch {
    pub grid: Vec<f64>,
    pub refine_iters: usize,
    pub scan_trials: u64,
}

impl Default for SigmaSearch {
    fn default() -> Self {
        SigmaSearch {
            grid: (1..=32).map(|k| 0.25 * k as f64).collect(),
            refine_iters: 12,
            scan_trials: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BecerraSweep {
    pub order: usize,
    pub stages: usize,
    pub etas: Vec<f64>,
    pub n_bars: Vec<f64>,
    pub sigma: SigmaPolicy,
    pub detector: Detector,
    pub trials_per_symbol: u64,
    pub seed: u64,
}

/// One row of a receiver curve. `sigma` and `delta` refer to the
/// transmitted constellation; `sigma` is infinite for a uniform prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eta: f64,
    pub n_bar: f64,
    pub delta: f64,
    pub sigma: f64,
    pub i_bits: f64,
    pub i_std_error: f64,
    pub i_bias: f64,
    pub c_coh: f64,
    pub c_sq: f64,
    pub c_holevo: f64,
    /// `I - 2 se > max(C_coh, C_sq)`.
    pub beats_gaussian: bool,
}

impl CurvePoint {
    pub fn c_gauss(&self) -> f64 {
        self.c_coh.max(self.c_sq)
    }
}

fn evaluate_sigma(
    sweep: &BecerraSweep,
    eta: f64,
    n_bar: f64,
    sigma: f64,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<(f64, McConfusion)> {
    let delta = solve_delta_for_energy(sweep.order, sigma, n_bar)?;
    let received = build_qam(sweep.order, delta, sigma)?.propagate(eta)?;
    let cfg = ReceiverConfig::new(received.alphabet().clone(), sweep.stages, sweep.detector)?;
    Ok((delta, monte_carlo_confusion(&cfg, trials, seed, exec)?))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn optimize_sigma(
    sweep: &BecerraSweep,
    search: &SigmaSearch,
    eta: f64,
    n_bar: f64,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    if search.grid.is_empty() || search.grid.iter().any(|s| !(*s > 0.0)) {
        return Err(invalid("sigma grid must be non-empty and positive"));
    }
    let score = |sigma: f64| -> Result<f64> {
        evaluate_sigma(sweep, eta, n_bar, sigma, search.scan_trials, seed, exec).map(|(_, mc)| mc.mi_plugin)
    };
    let scores = map_slice(exec, &search.grid, |s| score(*s)).into_iter().collect::<Result<Vec<_>>>()?;
    if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("information at sigma = {}", search.grid[bad])));
    }
    let best = argmax_lowest(&scores);
    let (mut best_sigma, mut best_score) = (search.grid[best], scores[best]);
    if search.grid.len() < 3 || search.refine_iters == 0 {
        return Ok(best_sigma);
    }
    let (mut a, mut b) = (
        search.grid[best.saturating_sub(1)],
        search.grid[(best + 1).min(search.grid.len() - 1)],
    );
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (score(c)?, score(d)?);
    for _ in 0..search.refine_iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = score(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = score(d)?;
        }
    }
    for (s, f) in [(c, fc), (d, fd)] {
        if f > best_score {
            best_sigma = s;
            best_score = f;
        }
    }
    Ok(best_sigma)
}

/// Receiver mutual information over the `etas x n_bars` product (row-major
/// in `eta`), next to the Gaussian capacities of the pure-loss channel.
///
/// With [`SigmaPolicy::Optimize`] the reported value is an independent run
/// at the selected width, so it carries no selection bias.
pub fn becerra_capacity_curve(sweep: &BecerraSweep, exec: Execution) -> Result<Vec<CurvePoint>> {
    QamOrder::from_size(sweep.order)?;
    if sweep.etas.is_empty() || sweep.n_bars.is_empty() {
        return Err(invalid("sweep needs at least one eta and one n_bar"));
    }
    if sweep.n_bars.iter().any(|n| !(*n > 0.0) || !n.is_finite()) {
        return Err(invalid("n_bar values must be positive"));
    }
    let nn = sweep.n_bars.len();
    let rows = map_range(exec, sweep.etas.len() * nn, |idx| -> Result<CurvePoint> {
        let (eta, n_bar) = (sweep.etas[idx / nn], sweep.n_bars[idx % nn]);
        let channel = PhaseInsensitiveChannel::from_loss(eta, 0.0)?;
        let report = capacity_report(&channel, n_bar)?;
        let sigma = match &sweep.sigma {
            SigmaPolicy::Uniform => f64::INFINITY,
            SigmaPolicy::Fixed { sigma } => *sigma,
            SigmaPolicy::Optimize(search) => {
                optimize_sigma(sweep, search, eta, n_bar, mix_seed(sweep.seed, 2 * idx as u64 + 1), exec)?
            }
        };
        let (delta, mc) = evaluate_sigma(
            sweep,
            eta,
            n_bar,
            sigma,
            sweep.trials_per_symbol,
            mix_seed(sweep.seed, 2 * idx as u64),
            exec,
        )?;
        let c_gauss = report.c_coh.max(report.c_sq);
        Ok(CurvePoint {
            eta,
            n_bar,
            delta,
            sigma,
            i_bits: mc.mi_plugin,
            i_std_error: mc.mi_std_error,
            i_bias: mc.mi_bias,
            c_coh: report.c_coh,
            c_sq: report.c_sq,
            c_holevo: report.c_holevo,
            beats_gaussian: mc.mi_plugin - 2.0 * mc.mi_std_error > c_gauss,
        })
    });
    rows.into_iter().collect()
}
