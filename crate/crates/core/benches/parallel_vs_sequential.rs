use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussbench::capacity::{efficiency_grid, AxisRange, ChannelFamily, Spacing};
use gaussbench::constellation::{build_qam, solve_delta_for_energy};
use gaussbench::heterodyne::heterodyne_curve;
use gaussbench::multimode::{additivity_suite, ScenarioSampler};
use gaussbench::par::Execution;
use gaussbench::receiver::{monte_carlo_confusion, ReceiverConfig};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn additivity(c: &mut Criterion) {
    let mut g = c.benchmark_group("additivity_suite_2000");
    g.sample_size(10);
    let sampler = ScenarioSampler::default();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| additivity_suite(&sampler, 2000, 1, 1e-9, black_box(exec)).unwrap())
        });
    }
    g.finish();
}

fn receiver(c: &mut Criterion) {
    let mut g = c.benchmark_group("receiver_mc_16qam_L64");
    g.sample_size(10);
    let delta = solve_delta_for_energy(16, f64::INFINITY, 8.0).unwrap();
    let qam = build_qam(16, delta, f64::INFINITY).unwrap().propagate(0.7).unwrap();
    let cfg = ReceiverConfig::ideal(qam.alphabet().clone(), 64).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| monte_carlo_confusion(&cfg, 20_000, 3, black_box(exec)).unwrap())
        });
    }
    g.finish();
}

fn grid(c: &mut Criterion) {
    let mut g = c.benchmark_group("efficiency_grid_200x200");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                efficiency_grid(
                    ChannelFamily::Loss(0.7),
                    AxisRange::new(1e-2, 1e4),
                    AxisRange::new(1e-3, 1e3),
                    200,
                    Spacing::Log,
                    black_box(exec),
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn heterodyne(c: &mut Criterion) {
    let mut g = c.benchmark_group("heterodyne_64qam_curve");
    g.sample_size(10);
    let n_bars = [1.0, 4.0, 10.0, 20.0, 40.0];
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| heterodyne_curve(64, 0.5, &[f64::INFINITY, 7.0], &n_bars, black_box(exec)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, additivity, receiver, grid, heterodyne);
criterion_main!(benches);
