use nalgebra::{DMatrix, Vector2};
use num_complex::Complex64;
use proptest::prelude::*;

use simuav::association::{solve_association, Association};
use simuav::channel::{sample_channels, sinr, LinkParams};
use simuav::config::SimConfig;
use simuav::location::{optimize_locations, LocationProblem};
use simuav::physics::{combiner, PhaseProfile, SimStack, TWO_PI};
use simuav::scenario::{build_scenario, check_feasibility};

fn params() -> LinkParams {
    LinkParams {
        tx_power: 0.5,
        noise_power: 1e-14,
        ref_gain: 1.0,
    }
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b)), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sinr_ignores_a_common_rotation(gains in complex_vec(5), phi in 0.0..TWO_PI, m in 0usize..5) {
        let rot = Complex64::from_polar(1.0, phi);
        let rotated: Vec<_> = gains.iter().map(|g| g * rot).collect();
        let (a, b) = (sinr(m, &gains, &params()), sinr(m, &rotated, &params()));
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn phases_are_periodic(seed in 0u64..1000, shift in -3i32..3) {
        let mut cfg = SimConfig::paper_default(2);
        cfg.atoms_per_layer = 9;
        let stack = SimStack::build(&cfg).unwrap();
        let mut rng = simuav::rng::from_seed(seed);
        let p = PhaseProfile::random(1, 2, 9, &mut rng);
        let shifted: Vec<f64> = p.uav(0).iter().map(|t| t + shift as f64 * TWO_PI).collect();
        let a = combiner(p.uav(0), &stack).unwrap();
        let b = combiner(&shifted, &stack).unwrap();
        prop_assert!((&a - &b).norm() <= 1e-9 * a.norm());
    }

    #[test]
    fn exact_association_beats_every_feasible_one(
        rates in prop::collection::vec(0.0..10.0f64, 15),
        perm in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let r = DMatrix::from_vec(5, 3, rates);
        let best = solve_association(&r).unwrap().objective(&r);
        let pairs: Vec<_> = (0..3).map(|u| (perm[u], u)).collect();
        let other = Association::from_pairs(5, 3, &pairs).unwrap().objective(&r);
        prop_assert!(best >= other - 1e-12);
    }

    #[test]
    fn path_gain_only_rescales_the_channel(seed in 0u64..200, dx in -300.0..300.0f64, dy in -300.0..300.0f64) {
        let mut cfg = SimConfig::paper_default(1);
        cfg.atoms_per_layer = 4;
        let stack = SimStack::build(&cfg).unwrap();
        let sc = build_scenario(&cfg, seed).unwrap();
        let ch = sample_channels(&stack, &sc, cfg.ref_gain, seed).unwrap();
        let mut q: Vec<_> = (0..sc.num_uavs()).map(|u| sc.horizontal(u)).collect();
        q[0] += Vector2::new(dx, dy);
        let moved = sc.with_uavs(&q);
        let ch2 = ch.relocated(&moved);
        for m in 0..sc.num_users() {
            let ratio = (ch2.path_gain(m, 0) / ch.path_gain(m, 0)).sqrt();
            let expect = ch.channel(m, 0) * Complex64::new(ratio, 0.0);
            prop_assert!((ch2.channel(m, 0) - &expect).norm() <= 1e-9 * expect.norm());
            prop_assert_eq!(ch2.fading(m, 0), ch.fading(m, 0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn placement_stays_feasible_and_never_loses(seed in 0u64..500) {
        let cfg = SimConfig::paper_default(3);
        let sc = build_scenario(&cfg, seed).unwrap();
        let mut rng = simuav::rng::from_seed(seed);
        let gp = DMatrix::from_fn(5, 3, |_, _| rand::Rng::random_range(&mut rng, 0.1..3.0));
        let assoc = solve_association(&gp).unwrap();
        let problem = LocationProblem::new(&sc, &assoc, &gp, cfg.ref_gain, cfg.tx_power, cfg.noise_power, 1.0);
        let start: Vec<_> = (0..3).map(|u| sc.horizontal(u)).collect();
        let out = optimize_locations(&problem, &start, &cfg.solver).unwrap();
        prop_assert!(check_feasibility(&sc.with_uavs(&out.positions)).is_empty());
        prop_assert!(out.capacity >= problem.true_capacity(&start) - 1e-9);
        prop_assert!(out.capacity_history.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }
}
