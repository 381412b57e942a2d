use gaussbench::capacity::{efficiency_grid, AxisRange, ChannelFamily, Spacing};
use gaussbench::constellation::{build_qam, Alphabet};
use gaussbench::heterodyne::{heterodyne_mi, HeterodyneModel};
use gaussbench::multimode::{additivity_suite, ScenarioSampler};
use gaussbench::par::Execution;
use gaussbench::receiver::{
    entropy_bits, exact_joint, monte_carlo_confusion, Detector, ReceiverConfig,
};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn execution_mode_does_not_change_results() {
    let sampler = ScenarioSampler::default();
    let a = additivity_suite(&sampler, 300, 17, 1e-9, Execution::Sequential).unwrap();
    let b = additivity_suite(&sampler, 300, 17, 1e-9, Execution::Parallel).unwrap();
    assert_eq!(a, b);

    let qam = build_qam(16, 1.3, 2.0).unwrap();
    let cfg = ReceiverConfig::ideal(qam.alphabet().clone(), 12).unwrap();
    let a = monte_carlo_confusion(&cfg, 3000, 5, Execution::Sequential).unwrap();
    let b = monte_carlo_confusion(&cfg, 3000, 5, Execution::Parallel).unwrap();
    assert_eq!(a.confusion, b.confusion);
    assert_eq!(a.mi_plugin.to_bits(), b.mi_plugin.to_bits());

    let grid = |exec| {
        efficiency_grid(
            ChannelFamily::Amplifier(1.5),
            AxisRange::new(0.1, 100.0),
            AxisRange::new(0.01, 10.0),
            12,
            Spacing::Log,
            exec,
        )
        .unwrap()
    };
    assert_eq!(grid(Execution::Sequential), grid(Execution::Parallel));
}

fn arb_alphabet() -> impl Strategy<Value = Alphabet> {
    prop::collection::vec((-4i32..=4, -4i32..=4, 0.05f64..1.0), 2..=5).prop_filter_map(
        "distinct lattice sites",
        |sites| {
            let mut seen = std::collections::HashSet::new();
            if !sites.iter().all(|(x, y, _)| seen.insert((*x, *y))) {
                return None;
            }
            let pts = sites.iter().map(|(x, y, _)| Complex64::new(*x as f64 * 0.4, *y as f64 * 0.4)).collect();
            let prior = sites.iter().map(|s| s.2).collect();
            Alphabet::new(pts, prior).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn receiver_information_chain(
        alphabet in arb_alphabet(),
        stages in 1usize..=6,
        efficiency in 0.3f64..=1.0,
        dark in 0.0f64..0.05,
    ) {
        let detector = Detector { efficiency, dark_count_prob: dark };
        let cfg = ReceiverConfig::new(alphabet.clone(), stages, detector).unwrap();
        let joint = exact_joint(&cfg).unwrap();
        let m = alphabet.len();
        for a in 0..m {
            let row = joint.confusion.row(a);
            prop_assert!(row.iter().all(|p| (0.0..=1.0 + 1e-12).contains(p)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        let h = entropy_bits(alphabet.prior());
        prop_assert!(joint.guess_information_bits >= -1e-12);
        prop_assert!(joint.guess_information_bits <= joint.record_information_bits + 1e-10);
        prop_assert!(joint.record_information_bits <= h + 1e-10);
    }

    #[test]
    fn heterodyne_bounded_and_degrades_with_noise(
        order in prop::sample::select(vec![4usize, 16]),
        delta in 0.1f64..3.0,
        sigma in prop::sample::select(vec![f64::INFINITY, 1.0, 3.0]),
        v in 0.5f64..3.0,
        extra in 0.05f64..2.0,
    ) {
        let qam = build_qam(order, delta, sigma).unwrap();
        let i1 = heterodyne_mi(&HeterodyneModel::from_qam(&qam, v).unwrap()).unwrap();
        let i2 = heterodyne_mi(&HeterodyneModel::from_qam(&qam, v + extra).unwrap()).unwrap();
        let n = qam.mean_photon_number();
        prop_assert!(i1 >= -1e-9);
        prop_assert!(i1 <= entropy_bits(qam.prior()) + 1e-9);
        prop_assert!(i1 <= (1.0 + n / v).log2() + 1e-9);
        prop_assert!(i2 <= i1 + 1e-9);
    }
}
