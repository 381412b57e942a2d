//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use gaussbench::multimode::parallel_channel_information;
use rand::Rng;

/// Best objective on a simplex grid of `budget / steps`, followed by
/// pairwise transfers optimized by golden-section search until no pair
/// improves. The objective is separable and concave, so a point where no
/// pairwise transfer helps is the global optimum.
pub fn waterfill_oracle(lambdas: &[f64], budget: f64) -> f64 {
    let d = lambdas.len();
    let steps = match d {
        1 => 1,
        2 => 400,
        3 => 60,
        4 => 24,
        5 => 12,
        6 => 8,
        _ => 6,
    };
    let mut best = vec![0.0; d];
    best[0] = budget;
    let mut best_val = parallel_channel_information(lambdas, &best);
    let mut counts = vec![0usize; d];
    simplex_walk(&mut counts, 0, steps, &mut |c| {
        let p: Vec<f64> = c.iter().map(|k| budget * *k as f64 / steps as f64).collect();
        let v = parallel_channel_information(lambdas, &p);
        if v > best_val {
            best_val = v;
            best = p;
        }
    });
    polish(lambdas, &mut best)
}

fn simplex_walk(counts: &mut Vec<usize>, i: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
    if i + 1 == counts.len() {
        counts[i] = left;
        visit(counts);
        return;
    }
    for k in 0..=left {
        counts[i] = k;
        simplex_walk(counts, i + 1, left - k, visit);
    }
}

fn polish(lambdas: &[f64], p: &mut [f64]) -> f64 {
    let d = p.len();
    let pair_value = |a: usize, b: usize, x: f64, total: f64| {
        0.5 * ((x / lambdas[a]).ln_1p() + ((total - x) / lambdas[b]).ln_1p())
    };
    for _sweep in 0..500 {
        let mut moved = 0.0f64;
        for a in 0..d {
            for b in a + 1..d {
                let total = p[a] + p[b];
                if total <= 0.0 {
                    continue;
                }
                let (mut lo, mut hi) = (0.0, total);
                for _ in 0..200 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if pair_value(a, b, m1, total) < pair_value(a, b, m2, total) {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                let x = 0.5 * (lo + hi);
                if pair_value(a, b, x, total) > pair_value(a, b, p[a], total) {
                    moved = moved.max((x - p[a]).abs());
                    p[a] = x;
                    p[b] = total - x;
                }
            }
        }
        if moved < 1e-13 {
            break;
        }
    }
    parallel_channel_information(lambdas, p)
}

/// Random allocation of `budget` over `d` channels: uniform on the simplex,
/// or supported on a random subset.
pub fn random_allocation<R: Rng + ?Sized>(d: usize, budget: f64, rng: &mut R) -> Vec<f64> {
    let sparse = rng.random_bool(0.3);
    let mut w: Vec<f64> = (0..d)
        .map(|_| {
            if sparse && rng.random_bool(0.5) {
                0.0
            } else {
                -(1.0 - rng.random::<f64>()).ln()
            }
        })
        .collect();
    let s: f64 = w.iter().sum();
    if s == 0.0 {
        w[rng.random_range(0..d)] = 1.0;
        return w.iter().map(|x| x * budget).collect();
    }
    w.iter().map(|x| x / s * budget).collect()
}

/// Line printed by the acceptance runner.
pub fn verdict(id: u32, pass: bool, detail: &str, secs: f64) -> String {
    format!(
        "criterion {id:>2}: {} [{secs:.2} s] {detail}",
        if pass { "PASS" } else { "FAIL" }
    )
}
