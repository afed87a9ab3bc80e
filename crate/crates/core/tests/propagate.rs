use proptest::prelude::*;

use sideband::drive::{monochromatic_reference, PulseSpec, PERIOD};
use sideband::fock::{BasisIndex, SpaceConfig};
use sideband::linalg::{max_abs, unitarity_defect};
use sideband::propagate::{
    propagate_between, propagate_exact, propagate_exact_with, simulate, simulate_target, uniform_grid,
    IntegratorOptions,
};

#[test]
fn norm_is_conserved_over_ten_periods() {
    let mono = monochromatic_reference(0.1, 0.05, 10).unwrap();
    let cfg = SpaceConfig::for_initial(2, 8).unwrap();
    for initial in [BasisIndex::g(1), BasisIndex::e(1), BasisIndex::g(2)] {
        let trace = simulate(&mono, cfg, initial, &uniform_grid(10.0 * PERIOD, 50)).unwrap();
        assert!(trace.population_drift() < 1e-8, "{initial}: {:e}", trace.population_drift());
        assert!(trace.unitarity_defect < 1e-8);
    }
}

#[test]
fn target_trace_is_a_two_level_rotation() {
    let cfg = SpaceConfig::for_initial(3, 4).unwrap();
    let grid = uniform_grid(40.0 * PERIOD, 4);
    let trace = simulate_target(0.1, cfg, BasisIndex::g(3), &grid).unwrap();
    let pg = trace.column(BasisIndex::g(3)).unwrap();
    let pe = trace.column(BasisIndex::e(2)).unwrap();
    for ((t, a), b) in grid.iter().zip(&pg).zip(&pe) {
        let theta = 0.1 * 3f64.sqrt() * t / 2.0;
        assert!((a - theta.cos().powi(2)).abs() < 1e-12);
        assert!((a + b - 1.0).abs() < 1e-12);
    }
}

fn spec_strategy() -> impl Strategy<Value = PulseSpec> {
    (0u32..4, 0.0f64..0.4, any::<u64>()).prop_map(|(n, delta, seed)| {
        let len = 2 * n as usize + 1;
        let f = (0..len).map(|i| ((seed >> (i % 60)) as f64 * 1e-3).sin() * 1.5).collect();
        PulseSpec::uniform(10, n, delta, f, 0.05, 0.1).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn propagators_are_unitary(spec in spec_strategy()) {
        let cfg = SpaceConfig::new(6, 2).unwrap();
        for s in propagate_exact(&spec, cfg, &[0.0, 0.5 * PERIOD, PERIOD]).unwrap() {
            prop_assert!(unitarity_defect(&s.u) < 1e-8);
        }
    }

    #[test]
    fn propagators_compose(spec in spec_strategy(), split in 0.1f64..0.9) {
        let cfg = SpaceConfig::new(5, 2).unwrap();
        let t1 = split * 2.0 * PERIOD;
        let t2 = 2.0 * PERIOD;
        let opts = IntegratorOptions::with_rtol(1e-12);
        let full = propagate_exact_with(&spec, cfg, &[0.0, t1, t2], opts).unwrap();
        let tail = propagate_between(&spec, cfg, t1, &[t2], opts).unwrap().pop().unwrap();
        let composed = &tail.u * &full[1].u;
        prop_assert!(max_abs(&(composed - &full[2].u)) < 1e-9);
    }
}
