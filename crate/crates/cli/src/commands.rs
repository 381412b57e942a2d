use std::path::Path;

use gaussbench::capacity::{
    capacity_report, crossover_energy, efficiency_grid as grid, AxisRange, ChannelFamily, Scheme,
    Spacing,
};
use gaussbench::channel::PhaseInsensitiveChannel;
use gaussbench::constellation::{build_qam, solve_delta_for_energy};
use gaussbench::heterodyne::{heterodyne_curve, heterodyne_mi, HeterodyneModel};
use gaussbench::majorization::{case_inequality_suite, eigen_sum_suite};
use gaussbench::multimode::{additivity_suite, parallel_channel_information, waterfill as wf, ScenarioSampler};
use gaussbench::par::Execution;
use gaussbench::receiver::{
    becerra_capacity_curve, exact_joint, monte_carlo_confusion, BecerraSweep, Detector,
    ReceiverConfig, SigmaPolicy, SigmaSearch,
};
use gaussbench::rng::{mix_seed, task_rng};
use rand::Rng;
use serde::Serialize;

use crate::config::*;
use crate::error::CliError;
use crate::output::{flag, num, Provenance, Table};

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(config_err("--threads must be >= 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_err(format!("thread pool: {e}")))?;
    Ok(())
}

/// Seeds, thread pool and provenance shared by every command.
fn prepare<P: Serialize>(
    command: &'static str,
    hashed: &P,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<Provenance, CliError> {
    init_threads(threads)?;
    let seed = master_seed(seed)?;
    Ok(Provenance {
        command,
        config_hash: config_hash(command, seed, hashed),
        seed,
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn require<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| config_err(format!("missing required parameter '{name}'")))
}

fn scheme_name(s: Scheme) -> String {
    match s {
        Scheme::Coherent => "coherent",
        Scheme::Squeezed => "squeezed",
    }
    .into()
}

pub fn capacity(mut p: CapacityParams) -> Result<(), CliError> {
    let nbar = require(p.nbar.clone(), "nbar")?;
    if nbar.is_empty() {
        return Err(config_err("--nbar needs at least one value"));
    }
    let chosen = [p.loss.is_some(), p.amp.is_some(), p.tau.is_some()];
    if chosen.iter().filter(|c| **c).count() != 1 {
        return Err(config_err("choose exactly one of --loss, --amp, or --tau with --m"));
    }
    let ch = if let Some(eta) = p.loss {
        PhaseInsensitiveChannel::from_loss(eta, *p.nth.get_or_insert(0.0))?
    } else if let Some(g) = p.amp {
        PhaseInsensitiveChannel::from_amplifier(g, *p.nth.get_or_insert(0.0))?
    } else {
        if p.nth.is_some() {
            return Err(config_err("--nth applies to --loss / --amp, not --tau/--m"));
        }
        PhaseInsensitiveChannel::new(p.tau.unwrap_or_default(), require(p.m, "m")?)?
    };
    let prov = prepare("capacity", &p.for_hash(), p.seed, p.threads)?;
    let mut t = Table::new(&[
        "tau", "m", "n_bar", "C_coh", "C_sq", "r_opt", "C_holevo", "C_gauss", "scheme",
        "efficiency", "n_bar_crossover",
    ]);
    let n_c = crossover_energy(&ch);
    for &n in &nbar {
        let r = capacity_report(&ch, n)?;
        t.push(vec![
            num(ch.tau()),
            num(ch.m()),
            num(n),
            num(r.c_coh),
            num(r.c_sq),
            num(r.optimal_squeezing_r),
            num(r.c_holevo),
            num(r.c_gauss),
            scheme_name(r.optimal_scheme),
            num(r.efficiency),
            num(n_c),
        ]);
    }
    emit(&t.render(&prov), p.out.as_deref())
}

pub fn efficiency_grid(mut p: GridParams) -> Result<(), CliError> {
    let tau = *p.tau.get_or_insert(0.7);
    let nbar = AxisRange::new(*p.nbar_min.get_or_insert(1e-2), *p.nbar_max.get_or_insert(1e4));
    let nth = AxisRange::new(*p.nth_min.get_or_insert(1e-3), *p.nth_max.get_or_insert(1e3));
    let resolution = *p.resolution.get_or_insert(40);
    let spacing = match p.spacing.get_or_insert_with(|| "log".into()).as_str() {
        "log" => Spacing::Log,
        "linear" | "lin" => Spacing::Linear,
        other => return Err(config_err(format!("spacing '{other}' is not log or linear"))),
    };
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(config_err("--tau must be positive"));
    }
    let prov = prepare("efficiency-grid", &p.for_hash(), p.seed, p.threads)?;
    let g = grid(ChannelFamily::from_tau(tau), nbar, nth, resolution, spacing, Execution::default())?;
    let mut t = Table::new(&[
        "n_th", "n_bar", "tau", "m", "C_coh", "C_sq", "C_holevo", "C_gauss", "efficiency",
        "scheme", "r_opt", "n_bar_crossover",
    ]);
    for c in &g.cells {
        let r = &c.report;
        t.push(vec![
            num(c.n_th),
            num(c.n_bar),
            num(c.tau),
            num(c.m),
            num(r.c_coh),
            num(r.c_sq),
            num(r.c_holevo),
            num(r.c_gauss),
            num(r.efficiency),
            scheme_name(r.optimal_scheme),
            num(r.optimal_squeezing_r),
            num(c.n_bar_crossover),
        ]);
    }
    if let Some(path) = p.crossover_out.as_deref() {
        let mut locus = Table::new(&["n_th", "n_bar_crossover"]);
        for &(n_th, n_c) in &g.crossover {
            locus.push(vec![num(n_th), num(n_c)]);
        }
        emit(&locus.render(&prov), Some(path))?;
    }
    emit(&t.render(&prov), p.out.as_deref())
}

pub fn waterfill(p: WaterfillParams) -> Result<(), CliError> {
    let lambdas = require(p.lambdas.clone(), "lambdas")?;
    let budget = require(p.budget, "budget")?;
    let prov = prepare("waterfill", &p.for_hash(), p.seed, p.threads)?;
    let a = wf(&lambdas, budget)?;
    let mut t = Table::new(&["lambda", "power", "active", "nu", "I_total_bits"]);
    for (i, (&l, &pw)) in a.lambdas.iter().zip(&a.powers).enumerate() {
        t.push(vec![num(l), num(pw), flag(i < a.k_active), num(a.nu), num(a.mutual_info_bits)]);
    }
    emit(&t.render(&prov), p.out.as_deref())
}

pub fn additivity(mut p: AdditivityParams) -> Result<(), CliError> {
    let trials = *p.trials.get_or_insert(10_000);
    let tolerance = *p.tolerance.get_or_insert(1e-9);
    let mut sampler = ScenarioSampler {
        max_modes: *p.max_modes.get_or_insert(4),
        max_squeezing: *p.max_squeezing.get_or_insert(2.0),
        ..ScenarioSampler::default()
    };
    if let Some(n) = p.modes {
        sampler.min_modes = n;
        sampler.max_modes = n;
        p.max_modes = None;
    }
    let prov = prepare("additivity-test", &p.for_hash(), p.seed, p.threads)?;
    let s = additivity_suite(&sampler, trials, prov.seed, tolerance, Execution::default())?;
    let mut t = Table::new(&["trials", "min_gap", "max_gap", "mean_gap", "violations", "worst_trial", "tolerance"]);
    t.push(vec![
        s.trials.to_string(),
        num(s.min_gap),
        num(s.max_gap),
        num(s.mean_gap),
        s.violations.to_string(),
        s.worst_trial.to_string(),
        num(s.tolerance),
    ]);
    emit(&t.render(&prov), p.out.as_deref())?;
    if s.violations > 0 {
        return Err(CliError::Invariant(format!(
            "{} of {} scenarios have additivity gap below -{}",
            s.violations, s.trials, s.tolerance
        )));
    }
    Ok(())
}

pub fn becerra(mut p: BecerraParams) -> Result<(), CliError> {
    let n_bars = require(p.nbar.clone(), "nbar")?;
    let order = *p.order.get_or_insert(4);
    let stages = *p.stages.get_or_insert(64);
    let etas = p.eta.get_or_insert_with(|| vec![0.7]).clone();
    let trials = *p.trials.get_or_insert(200_000);
    let detector = Detector {
        efficiency: *p.detector_efficiency.get_or_insert(1.0),
        dark_count_prob: *p.dark_count.get_or_insert(0.0),
    };
    let sigma = match *p.sigma.get_or_insert(SigmaChoice::Uniform) {
        SigmaChoice::Uniform => {
            p.scan_trials = None;
            SigmaPolicy::Uniform
        }
        SigmaChoice::Fixed(sigma) => {
            p.scan_trials = None;
            SigmaPolicy::Fixed { sigma }
        }
        SigmaChoice::Optimize => SigmaPolicy::Optimize(SigmaSearch {
            scan_trials: *p.scan_trials.get_or_insert(20_000),
            ..SigmaSearch::default()
        }),
    };
    let prov = prepare("becerra", &p.for_hash(), p.seed, p.threads)?;
    let sweep = BecerraSweep {
        order,
        stages,
        etas,
        n_bars,
        sigma,
        detector,
        trials_per_symbol: trials,
        seed: prov.seed,
    };
    let curve = becerra_capacity_curve(&sweep, Execution::default())?;
    let mut t = Table::new(&[
        "eta", "n_bar", "delta", "sigma", "I_becerra", "I_stderr", "C_coh", "C_sq", "C_holevo",
        "beats_gaussian",
    ]);
    for c in &curve {
        t.push(vec![
            num(c.eta),
            num(c.n_bar),
            num(c.delta),
            num(c.sigma),
            num(c.i_bits),
            num(c.i_std_error),
            num(c.c_coh),
            num(c.c_sq),
            num(c.c_holevo),
            flag(c.beats_gaussian),
        ]);
    }
    emit(&t.render(&prov), p.out.as_deref())
}

pub fn qam_heterodyne(mut p: HeterodyneParams) -> Result<(), CliError> {
    let n_bars = require(p.nbar.clone(), "nbar")?;
    let order = *p.order.get_or_insert(64);
    let eta = *p.eta.get_or_insert(0.5);
    let sigmas: Vec<f64> = p
        .sigma
        .get_or_insert_with(|| vec![Width(f64::INFINITY)])
        .iter()
        .map(|w| w.0)
        .collect();
    let prov = prepare("qam-heterodyne", &p.for_hash(), p.seed, p.threads)?;
    let rows = heterodyne_curve(order, eta, &sigmas, &n_bars, Execution::default())?;
    let mut t = Table::new(&["M", "eta", "sigma", "delta", "n_bar", "I_bits", "C_coh_bits", "past_marker"]);
    for r in &rows {
        t.push(vec![
            r.order.to_string(),
            num(r.eta),
            num(r.sigma),
            num(r.delta),
            num(r.n_bar),
            num(r.i_bits),
            num(r.c_coh),
            flag(r.past_marker),
        ]);
    }
    emit(&t.render(&prov), p.out.as_deref())
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

impl Check {
    /// Passes when `value <= limit`.
    fn passed(&self) -> bool {
        self.value <= self.limit
    }
}

pub fn selftest(mut p: SelftestParams) -> Result<(), CliError> {
    let scale = *p.scale.get_or_insert(1.0);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(config_err("--scale must be positive"));
    }
    let prov = prepare("selftest", &p.for_hash(), p.seed, p.threads)?;
    let count = |base: f64| ((base * scale).ceil() as usize).max(1);
    let exec = Execution::default();
    let seed = prov.seed;
    let mut rng = task_rng(seed, u64::MAX);
    let mut checks = Vec::new();

    let mut tie = 0.0f64;
    let mut order_gap = 0.0f64;
    for _ in 0..count(200.0) {
        let tau: f64 = rng.random_range(0.05..0.95);
        let ch = PhaseInsensitiveChannel::from_loss(tau, rng.random_range(0.01..50.0))?;
        let n_c = crossover_energy(&ch);
        let r = capacity_report(&ch, n_c)?;
        tie = tie.max((r.c_coh - r.c_sq).abs());
        let r = capacity_report(&ch, rng.random_range(0.0..100.0))?;
        order_gap = order_gap.max(r.c_gauss - r.c_holevo);
    }
    checks.push(Check { name: "coherent_equals_squeezed_at_crossover", value: tie, limit: 1e-9 });
    checks.push(Check { name: "gaussian_below_holevo", value: order_gap, limit: 1e-12 });

    let mut excess = f64::NEG_INFINITY;
    for _ in 0..count(100.0) {
        let d = rng.random_range(1..=6);
        let lambdas: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..10.0)).collect();
        let budget = rng.random_range(0.1..20.0);
        let a = wf(&lambdas, budget)?;
        for _ in 0..20 {
            let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            let powers: Vec<f64> = w.iter().map(|x| budget * x / total).collect();
            excess = excess.max(parallel_channel_information(&a.lambdas, &powers) - a.mutual_info_bits);
        }
    }
    checks.push(Check { name: "waterfill_beats_random_allocations", value: excess, limit: 1e-12 });

    let add = additivity_suite(&ScenarioSampler::default(), count(500.0), mix_seed(seed, 1), 1e-9, exec)?;
    checks.push(Check { name: "additivity_violations", value: add.violations as f64, limit: 0.0 });
    let eig = eigen_sum_suite(count(300.0), 6, mix_seed(seed, 2), exec)?;
    checks.push(Check { name: "eigen_sum_majorization_failures", value: eig as f64, limit: 0.0 });
    let cases = case_inequality_suite(count(1000.0), 6, mix_seed(seed, 3), exec)?;
    checks.push(Check { name: "active_information_case_violations", value: cases.violations as f64, limit: 0.0 });

    let delta = solve_delta_for_energy(4, f64::INFINITY, 1.5)?;
    let qam = build_qam(4, delta, f64::INFINITY)?;
    let cfg = ReceiverConfig::ideal(qam.alphabet().clone(), 8)?;
    let exact = exact_joint(&cfg)?;
    let trials = count(20_000.0) as u64;
    let mc = monte_carlo_confusion(&cfg, trials, mix_seed(seed, 4), exec)?;
    let mut z = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            let pe = exact.confusion.get(a, b);
            let se = (pe * (1.0 - pe) / trials as f64).sqrt().max(1e-12);
            z = z.max((mc.confusion.get(a, b) - pe).abs() / se);
        }
    }
    checks.push(Check { name: "receiver_mc_vs_exact_max_z", value: z, limit: 5.0 });
    checks.push(Check {
        name: "receiver_information_above_log2_m",
        value: exact.guess_information_bits - 2.0,
        limit: 1e-12,
    });

    let qam = build_qam(16, solve_delta_for_energy(16, f64::INFINITY, 4.0)?, f64::INFINITY)?;
    let eta = 0.6;
    let i_het = heterodyne_mi(&HeterodyneModel::pure_loss(&qam.propagate(eta)?))?;
    checks.push(Check {
        name: "heterodyne_above_coherent_capacity",
        value: i_het - (1.0 + eta * qam.mean_photon_number()).log2(),
        limit: 1e-9,
    });

    let mut t = Table::new(&["check", "passed", "value", "limit"]);
    for c in &checks {
        t.push(vec![c.name.into(), flag(c.passed()), num(c.value), num(c.limit)]);
    }
    emit(&t.render(&prov), p.out.as_deref())?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("selftest failed: {}", failed.join(", "))))
    }
}
