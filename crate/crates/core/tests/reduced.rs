use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use sqzmirror::coefficients::{derive, PhysicalParams};
use sqzmirror::compiler::{compile, reduced_generator};
use sqzmirror::gaussian::rotate_local;
use sqzmirror::reduced::*;
use sqzmirror::Error;

mod common;

#[test]
fn uncoupled_system() {
    let mut p = PhysicalParams::baseline();
    p.eta0 = 0.0;
    p.temperature = 3e-3;
    let sys = build_system(&p).unwrap();
    let (g, w) = (p.gamma_m, p.omega_m);
    let expected = DMatrix::from_row_slice(
        3,
        3,
        &[-2.0 * g, 0.0, 2.0 * w, 0.0, -2.0 * g, -2.0 * w, -w, w, -2.0 * g],
    );
    assert_relative_eq!(sys.m3, expected, epsilon = 1e-9 * w);
    let phi = sys.coeffs.phi;
    assert_relative_eq!(
        sys.drive(0.3e-7),
        DVector::from_vec(vec![phi, phi, 0.0]),
        epsilon = 1e-9 * phi
    );
    let v = sys.steady_v3(Phase::PLUS).unwrap();
    let c = sys.nbar0() + 0.5;
    for (a, b) in v.iter().zip([c, c, 0.0]) {
        assert_relative_eq!(*a, b, epsilon = 1e-9);
    }
    let rep = steady_report(&sys, Phase::PLUS).unwrap();
    assert_eq!(rep.criterion.e_n, 0.0);
}

#[test]
fn no_squeezing_drive() {
    let mut p = PhysicalParams::baseline();
    p.r = 0.0;
    let sys = build_system(&p).unwrap();
    let aff = sys.affine();
    assert_eq!(aff.b_up.iter().map(|z| z.norm()).sum::<f64>(), 0.0);
    assert_relative_eq!(aff.b_dc, sys.b0, epsilon = 0.0);
}

#[test]
fn drift_does_not_depend_on_squeezing() {
    let p = PhysicalParams::baseline();
    let c = derive(&p).unwrap();
    let a = compile(&reduced_generator(&c.with_squeezing_weights(0.0, 0.0), 0.0).unwrap()).unwrap();
    let b = compile(&reduced_generator(&c.with_squeezing_weights(2.3, 1.7), 0.0).unwrap()).unwrap();
    assert_relative_eq!(a.drift, b.drift, epsilon = 1e-12 * a.drift.amax());
}

#[test]
fn criterion_examples() {
    let vbar = |dp2: f64| {
        let v22 = (dp2 + 0.5) / 2.0;
        assemble([0.5, v22, 0.0], 0.0).unwrap()
    };
    let r = criterion(&vbar(0.4), 0.0).unwrap();
    assert!(r.entangled && r.e_n > 0.0);
    assert_relative_eq!(r.threshold, 0.5);
    let r = criterion(&vbar(0.5), 0.0).unwrap();
    assert!(!r.entangled && r.consistent);
    let skewed = assemble([0.7, 0.4, 0.1], 0.0).unwrap();
    assert!(matches!(criterion(&skewed, 0.0), Err(Error::FrameNotRotated(_))));
}

#[test]
fn thermal_threshold() {
    let n = sqzmirror::coefficients::thermal_occupation(2.0 * std::f64::consts::PI * 32.1e6, 2.5e-3).unwrap();
    // 30-digit evaluation of 1/[2(2n̄₀+1)] at (2π·32.1 MHz, 2.5 mK).
    assert_relative_eq!(threshold(n), 0.149_358_999_044_407_03, max_relative = 1e-12);
}

#[test]
fn assembled_state_has_the_symmetric_form() {
    let v = assemble([0.9, 0.3, 0.05], 0.4).unwrap();
    let c = 0.9;
    assert_relative_eq!(v.get(0, 0) + v.get(0, 2), c);
    assert_relative_eq!(v.get(1, 1) + v.get(1, 3), c);
    assert_eq!(v.get(0, 3), -0.05);
    assert_eq!(v.get(1, 2), -0.05);
    assert_eq!(v.get(2, 3), 0.05);
}

#[test]
fn rotated_frame_identity() {
    let rep = steady_state(&PhysicalParams::baseline(), Phase::PLUS).unwrap();
    let vbar = rotate_local(&rep.covariance, rep.observables.theta).unwrap();
    let a11 = vbar.get(0, 0) - vbar.get(1, 1);
    let v = &rep.state.v3;
    let mod_a1a1 = ((v[0] - v[1]).powi(2) + 4.0 * v[2] * v[2]).sqrt() / 2.0;
    assert!(a11 >= 0.0);
    assert_relative_eq!(a11, 2.0 * mod_a1a1, max_relative = 1e-10);
    let (nu1, nu2) = rep.observables.nu_tilde_from_variances();
    assert_relative_eq!(nu1, rep.observables.nu_tilde[0], max_relative = 1e-8);
    assert_relative_eq!(nu2, rep.observables.nu_tilde[1], max_relative = 1e-8);
}

#[test]
fn squeezing_parts_match_closed_forms() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..5 {
        let sys = build_system(&common::random_params(&mut rng)).unwrap();
        let k = &sys.coeffs;
        let scale = common::b3(k, 0.0).amax();
        assert!((&sys.b1 - common::b1(k)).amax() < 1e-10 * scale);
        assert!((&sys.b2 - common::b2(k)).camax() < 1e-10 * scale);
        let printed = common::b0_printed(k);
        assert!((sys.b0[0] - printed[0].re).abs() < 1e-10 * scale);
        assert!((sys.b0[2] - printed[2].re).abs() < 1e-10 * scale);
    }
}

#[test]
fn printed_static_drive_needs_the_real_part() {
    // Only Re ζ₊ can enter a real drive; with it the static part follows from ξ at N = M = 0.
    let sys = build_system(&PhysicalParams::baseline()).unwrap();
    let k = &sys.coeffs;
    let printed = common::b0_printed(k)[1];
    assert!(printed.im.abs() > 1e-3 * printed.re.abs());
    assert_relative_eq!(sys.b0[1], printed.re, max_relative = 1e-10);
    let bare = k.with_squeezing_weights(0.0, 0.0);
    let expected = common::b3(&bare, 0.0);
    assert!((&sys.b0 - &expected).amax() < 1e-10 * expected.amax());
}

#[test]
fn ten_moment_system_matches_compiled_lyapunov_flow() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..5 {
        let p = common::random_params(&mut rng);
        let k = derive(&p).unwrap();
        let eqs = compile(&reduced_generator(&k, 0.0).unwrap()).unwrap();
        let m = common::lyapunov_in_ten(&eqs.drift);
        let oracle = common::m10(&k);
        assert!(common::max_rel(&m, &oracle) < 1e-10, "{}", common::max_rel(&m, &oracle));
        for t in [0.0, 1.3e-9, 7.7e-8] {
            let b = common::ten_of(&eqs.diffusion(t));
            let expected = common::b10(&k, t);
            assert!((&b - &expected).amax() < 1e-10 * expected.amax());
        }
    }
}

#[test]
fn cavity_shift_coefficients() {
    let k = derive(&PhysicalParams::baseline()).unwrap();
    let close = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-12 * b.norm();
    assert!(close(k.zeta_minus, common::zeta_minus(&k)));
    assert!(close(k.zeta_plus, common::zeta_plus(&k)));
    let (bp, bm) = common::zeta_bar(&k);
    assert!(close(k.zeta_bar_plus, bp) && close(k.zeta_bar_minus, bm));
    for t in [0.0, 2.1e-9, 4.4e-8] {
        assert!(close(k.xi_drive(t), common::xi(&k, t)));
    }
}

fn point(r: f64, t: f64, log_p: f64, d: f64, log_g: f64) -> PhysicalParams {
    let mut p = PhysicalParams::baseline();
    p.r = r;
    p.temperature = t;
    p.power = 10f64.powf(log_p);
    p.delta = d * p.omega_m;
    p.kappa = p.gamma_m / 10f64.powf(log_g);
    p
}

mod properties {
    use super::*;
    use proptest::prelude::*;
    use sqzmirror::gaussian::{log_negativity, symplectic_eigenvalues};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn steady_states_are_consistent(
            r in 0.0..2.5f64, t in 0.0..10e-3f64, log_p in -8.0..-5.4f64, d in 0.5..1.5f64, log_g in -4.0..-2.0f64,
            minus in any::<bool>(),
        ) {
            let p = point(r, t, log_p, d, log_g);
            let phase = if minus { Phase::MINUS } else { Phase::PLUS };
            let rep = steady_state(&p, phase);
            prop_assume!(rep.is_ok());
            let rep = rep.unwrap();
            let o = &rep.observables;
            prop_assert!(o.dq2_minus * o.dp2_minus >= 0.25 - 1e-9);
            prop_assert!(o.nu_tilde[0] <= o.nu_tilde[1]);
            prop_assert!(rep.covariance.min_symplectic_eigenvalue() >= 0.5 - 1e-6);
            let c = rep.criterion;
            prop_assert!(c.consistent);
            if (c.dp2_minus - c.threshold).abs() > CRITERION_BAND {
                prop_assert_eq!(c.e_n > 0.0, c.dp2_minus < c.threshold);
            }
            let vbar = rotate_local(&rep.covariance, o.theta).unwrap();
            prop_assert!(vbar.get(0, 0) - vbar.get(1, 1) >= -1e-12 * vbar.get(0, 0));
            let nu = symplectic_eigenvalues(&rep.covariance);
            prop_assert!(nu.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!((log_negativity(&vbar).unwrap().value - o.e_n).abs() < 1e-10 * o.e_n.max(1.0));
        }

        #[test]
        fn compiled_drift_matches_closed_form(
            r in 0.0..2.5f64, t in 0.0..10e-3f64, log_p in -8.0..-5.4f64, d in 0.5..1.5f64, log_g in -4.0..-2.0f64,
            time in 0.0..1e-7f64,
        ) {
            let sys = build_system(&point(r, t, log_p, d, log_g)).unwrap();
            let oracle = common::m3(&sys.coeffs);
            prop_assert!(common::max_rel(&sys.m3, &oracle) < 1e-12);
            let b = common::b3(&sys.coeffs, time);
            prop_assert!((sys.drive(time) - &b).amax() < 1e-10 * b.amax());
        }
    }
}

#[test]
fn steady_state_is_periodic_and_attracting() {
    use sqzmirror::dynamics::{fastest_rate, TimeGrid};
    let p = PhysicalParams::baseline();
    let sys = build_system(&p).unwrap();
    let period = sys.coeffs.period().unwrap();
    let periods = (20.0 / -sys.stability().unwrap() / period).ceil() as usize + 1;
    // One sample per modulation period, each an even multiple of π/(2Δ).
    let per_period = (period * fastest_rate(&sys.m3, p.delta) / 0.005).ceil() as usize;
    let grid = TimeGrid::new(0.0, periods as f64 * period, periods * per_period, per_period).unwrap();
    let (_, ys) = evolve_v3(&sys, &grid).unwrap();
    let steady = sys.steady_v3(Phase::PLUS).unwrap();
    for y in &ys[ys.len() - 2..] {
        for i in 0..3 {
            assert!((y[i] - steady[i]).abs() < 1e-8 * steady[0], "{y:?} vs {steady:?}");
        }
    }
}
