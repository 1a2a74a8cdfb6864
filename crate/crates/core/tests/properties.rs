use dollard_core::adiabatic::{exp_integral_e1, switching_integral, EULER_GAMMA};
use dollard_core::asymptotics::extracted_increment;
use dollard_core::moller::Reference;
use dollard_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> Grid {
    make_grid(256, 128.0, 1.0).unwrap()
}

fn packet() -> impl Strategy<Value = PacketSpec> {
    (-20.0..20.0f64, -2.0..2.0f64, 2.0..6.0f64).prop_map(|(x0, p0, s)| PacketSpec::new(x0, p0, s))
}

fn random_state() -> impl Strategy<Value = State> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 256).prop_map(|v| {
        let amps = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        State::new(&grid(), Representation::Position, amps)
            .unwrap()
            .normalized()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(psi in random_state()) {
        let k = psi.to_momentum();
        prop_assert!((k.norm_sqr() - psi.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn transform_round_trip(psi in random_state()) {
        let back = psi.to_momentum().to_position();
        let err = psi
            .amplitudes()
            .iter()
            .zip(back.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        prop_assert!(err < 1e-13);
    }

    #[test]
    fn overlap_is_hermitian(a in random_state(), b in random_state()) {
        let ab = overlap(&a, &b).unwrap();
        let ba = overlap(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-13);
        prop_assert!(ab.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn packets_are_normalized(spec in packet()) {
        let psi = gaussian_packet(&grid(), &spec).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        let p = expect(&psi, &Observable::Momentum).unwrap();
        prop_assert!((p - spec.p0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_propagators_are_unitary(
        psi in random_state(),
        t in -1e4..1e4f64,
        alpha in 0.0..2.0f64,
        eps in 0.0..0.5f64,
    ) {
        let sw = SwitchingSpec::new(eps, 0.0);
        for out in [
            free_propagate(&psi, t),
            dollard_propagate(&psi, t, alpha),
            adiabatic_dollard_propagate(&psi, t, alpha, &sw),
        ] {
            prop_assert!((out.norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn free_group_law(psi in random_state(), s in -50.0..50.0f64, t in -50.0..50.0f64) {
        let two = free_propagate(&free_propagate(&psi, s), t);
        prop_assert!(distance(&two, &free_propagate(&psi, s + t)).unwrap() < 1e-12);
    }

    #[test]
    fn dollard_phase_is_odd_in_time(k in -5.0..5.0f64, t in 0.0..1e5f64, alpha in 0.0..2.0f64) {
        let g = make_grid(64, 32.0, 1.3).unwrap();
        let m = g.mass();
        let plus = dynamics::dollard_phase_at(k, t, alpha, m);
        prop_assert_eq!(dynamics::dollard_phase_at(k, -t, alpha, m), -plus);
        prop_assert!(plus <= 0.0);
    }

    #[test]
    fn split_step_preserves_norm_and_reverses(
        spec in packet(),
        alpha in 0.0..1.0f64,
        span in 1.0..20.0f64,
        eps in prop_oneof![Just(0.0), 0.01..0.3f64],
    ) {
        let g = grid();
        let psi = gaussian_packet(&g, &spec).unwrap();
        let pot = PotentialSpec::coulomb(alpha, 1.0);
        let sw = SwitchingSpec::new(eps, 0.0);
        let cfg = StepperConfig::new(0.02);
        let out = full_propagate(&psi, -3.0, span, &pot, &sw, &cfg).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        let back = full_propagate(&out, span, -3.0, &pot, &sw, &cfg).unwrap();
        prop_assert!(distance(&back, &psi).unwrap() < 1e-10);
    }

    #[test]
    fn extracted_increment_is_unitary(
        psi in random_state(),
        t in 1.0..1e4f64,
        s in -0.5..0.5f64,
    ) {
        for reference in [Reference::Free, Reference::Dollard] {
            let out = extracted_increment(&reference, 0.5, t, s * t, &psi);
            prop_assert!((out.norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn switching_integral_is_antisymmetric(eps in 0.0..2.0f64, t in -1e4..1e4f64) {
        prop_assert_eq!(switching_integral(eps, -t), -switching_integral(eps, t));
    }

    #[test]
    fn switching_integral_is_monotone_and_bounded(
        eps in 1e-3..2.0f64,
        t in 1.0..1e4f64,
        dt in 0.0..100.0f64,
    ) {
        let a = switching_integral(eps, t);
        let b = switching_integral(eps, t + dt);
        let limit = exp_integral_e1(eps);
        prop_assert!(a >= 0.0);
        prop_assert!(b >= a - 1e-14);
        prop_assert!(b <= limit * (1.0 + 1e-10));
    }

    #[test]
    fn e1_small_argument_bound(eps in 1e-8..0.1f64) {
        prop_assert!((exp_integral_e1(eps) + EULER_GAMMA + eps.ln()).abs() < eps);
    }
}
