//! Structural invariants checked over randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;

use mzfringe::interferometer::{
    contrast, sequence_transfer, single_pulse_p2, three_pulse_p2, MzSequence,
};
use mzfringe::physics::{AtomCloud, PulseTransfer, RamanBeam, TwoLevelState};
use mzfringe::quadrature::{integrate, radial_average, RadialGrid};
use mzfringe::scenario::Preset;

const OMEGA0: f64 = 2.0 * std::f64::consts::PI * 25e3;

fn pulse_params() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (
        0.0..5e5f64,                                 // omega_eff
        -5e5..5e5f64,                                // delta
        0.0..2e-4f64,                                // tau
        -std::f64::consts::PI..std::f64::consts::PI, // phi
        0.0..1.0f64,                                 // t0
    )
}

fn normalized_state(re1: f64, im1: f64, re2: f64, im2: f64) -> Option<TwoLevelState> {
    let c1 = Complex64::new(re1, im1);
    let c2 = Complex64::new(re2, im2);
    let norm = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
    if norm < 1e-3 {
        return None;
    }
    Some(TwoLevelState::new(c1 / norm, c2 / norm))
}

proptest! {
    #[test]
    fn transfer_matrix_is_unitary(
        (omega, delta, tau, phi, t0) in pulse_params(),
        re1 in -1.0..1.0f64, im1 in -1.0..1.0f64,
        re2 in -1.0..1.0f64, im2 in -1.0..1.0f64,
    ) {
        let m = PulseTransfer::new(omega, tau, delta, t0, phi).unwrap();
        prop_assert!((m.norm_sqr() - 1.0).abs() < 1e-12);
        if let Some(state) = normalized_state(re1, im1, re2, im2) {
            let out = m.apply(&state);
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_matches_sequential_application(
        (omega1, delta1, tau1, phi1, t01) in pulse_params(),
        (omega2, delta2, tau2, phi2, t02) in pulse_params(),
    ) {
        let m1 = PulseTransfer::new(omega1, tau1, delta1, t01, phi1).unwrap();
        let m2 = PulseTransfer::new(omega2, tau2, delta2, t02, phi2).unwrap();
        let combined = m2.compose(&m1);
        let ground = TwoLevelState::ground();
        let direct = m2.apply(&m1.apply(&ground));
        let via_product = combined.apply(&ground);
        prop_assert!((direct.c1 - via_product.c1).norm() < 1e-12);
        prop_assert!((direct.c2 - via_product.c2).norm() < 1e-12);
        prop_assert!((combined.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dagger_inverts((omega, delta, tau, phi, t0) in pulse_params()) {
        let m = PulseTransfer::new(omega, tau, delta, t0, phi).unwrap();
        let id = m.dagger().compose(&m);
        prop_assert!((id.a() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(id.b().norm() < 1e-12);
    }

    #[test]
    fn pulse_area_equivalence_pointwise(
        omega in 1e3..5e5f64,
        tau in 1e-6..1e-4f64,
        gamma in 0.1..3.0f64,
    ) {
        // at resonance only the product omega tau matters
        let scaled_omega = PulseTransfer::new(gamma * omega, tau, 0.0, 0.0, 0.0).unwrap();
        let scaled_tau = PulseTransfer::new(omega, gamma * tau, 0.0, 0.0, 0.0).unwrap();
        prop_assert!(
            (scaled_omega.transition_probability() - scaled_tau.transition_probability()).abs()
                < 1e-12
        );
    }

    #[test]
    fn pulse_area_equivalence_ensemble(
        temperature in 1e-6..10e-6f64,
        t in 0.0..1.0f64,
        gamma in 0.5..2.5f64,
    ) {
        let grid = RadialGrid::default();
        let beam = RamanBeam::new(20e-3, OMEGA0).unwrap();
        let cloud = AtomCloud::rb87(3e-3, temperature).unwrap();
        let tau = beam.tau_pi();
        let by_intensity = single_pulse_p2(&beam, &cloud, t, tau, gamma, &grid, None).unwrap();
        let by_duration =
            single_pulse_p2(&beam, &cloud, t, gamma * tau, 1.0, &grid, None).unwrap();
        // two independent adaptive integrations, so only the quadrature
        // tolerance is guaranteed
        prop_assert!((by_intensity - by_duration).abs() < 5e-9);
    }

    #[test]
    fn sequence_gamma_equivalence(
        temperature in 1e-6..10e-6f64,
        g1 in 0.8..1.6f64,
        g2 in 0.8..1.6f64,
        g3 in 0.8..1.6f64,
        phi3 in 0.0..(2.0 * std::f64::consts::PI),
    ) {
        let grid = RadialGrid::default();
        let beam = RamanBeam::new(20e-3, OMEGA0).unwrap();
        let cloud = AtomCloud::rb87(3e-3, temperature).unwrap();
        let base = MzSequence::new(beam, cloud, 0.13, 0.26).unwrap();
        let durations = [
            base.pulses()[0].duration,
            base.pulses()[1].duration,
            base.pulses()[2].duration,
        ];
        let by_intensity = base.clone().with_gammas([g1, g2, g3]).unwrap();
        let by_duration = base
            .with_durations([g1 * durations[0], g2 * durations[1], g3 * durations[2]])
            .unwrap();
        let p_intensity = three_pulse_p2(&by_intensity, phi3, &grid, None).unwrap();
        let p_duration = three_pulse_p2(&by_duration, phi3, &grid, None).unwrap();
        prop_assert!((p_intensity - p_duration).abs() < 5e-9);
    }

    #[test]
    fn cloud_width_law(
        sigma0 in 1e-4..1e-2f64,
        temperature in 1e-7..2e-5f64,
        t in 0.0..3.0f64,
    ) {
        let cloud = AtomCloud::rb87(sigma0, temperature).unwrap();
        let sigma = cloud.sigma(t).unwrap();
        let sv = cloud.velocity_width();
        let reconstructed = (sigma * sigma - sv * sv * t * t).sqrt();
        prop_assert!((reconstructed - sigma0).abs() < 1e-12 * sigma0.max(1.0));
        prop_assert!(sigma >= sigma0);
    }

    #[test]
    fn weight_normalizes_for_any_tail_cut(rho_max in 6.0..16.0f64) {
        let grid = RadialGrid::new(rho_max, 1e-10, 4000).unwrap();
        let avg = radial_average(|_| 1.0, &grid, None).unwrap();
        prop_assert!((avg - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tighter_tolerance_refines_the_estimate(freq in 1.0..40.0f64) {
        let loose = integrate(|x| (freq * x).sin(), 0.0, 1.0, 1e-6, 4000).unwrap();
        let tight = integrate(|x| (freq * x).sin(), 0.0, 1.0, 1e-12, 4000).unwrap();
        let exact = (1.0 - (freq).cos()) / freq;
        prop_assert!((tight - exact).abs() < 1e-10);
        prop_assert!((loose - exact).abs() < 1e-5);
    }

    #[test]
    fn probability_conserved_across_sequence(
        rho in 0.0..8.0f64,
        s1 in 0.5..100.0f64,
        shrink2 in 0.2..1.0f64,
        shrink3 in 0.2..1.0f64,
        phi3 in 0.0..(2.0 * std::f64::consts::PI),
    ) {
        let tau0 = std::f64::consts::PI / OMEGA0;
        let (s2, s3) = (s1 * shrink2, s1 * shrink2 * shrink3);
        let omega =
            |s: f64| OMEGA0 * (-rho * rho / (2.0 * s * s)).exp();
        let m = sequence_transfer(
            [omega(s1), omega(s2), omega(s3)],
            [tau0 / 2.0, tau0, tau0 / 2.0],
            [0.0, 0.0, phi3],
        )
        .unwrap();
        let out = m.apply(&TwoLevelState::ground());
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

/// Two-point contrast against a dense 720-point fringe scan: the fringe
/// extrema really sit at phi3 = 0 and pi under zero pulse phases.
#[test]
fn two_point_contrast_matches_dense_scan() {
    let grid = RadialGrid::default();
    for preset in [Preset::Normal, Preset::Better, Preset::Ideal] {
        let seq = preset.sequence();
        let two_point = contrast(&seq, &grid, None).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..720 {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / 720.0;
            let p = three_pulse_p2(&seq, phi, &grid, None).unwrap();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let scanned = (hi - lo) / (hi + lo);
        assert!(
            (two_point - scanned).abs() < 1e-3,
            "{}: two-point {two_point} vs scanned {scanned}",
            preset.name()
        );
    }
}

/// Contrast ordering across the presets and the homogeneous limits.
#[test]
fn contrast_hierarchy_and_limits() {
    let grid = RadialGrid::default();
    let c_normal = contrast(&Preset::Normal.sequence(), &grid, None).unwrap();
    let c_better = contrast(&Preset::Better.sequence(), &grid, None).unwrap();
    let c_ideal = contrast(&Preset::Ideal.sequence(), &grid, None).unwrap();
    assert!(c_normal < c_better && c_better < c_ideal);
    assert!(c_ideal > 0.999);
    // gamma -> 1 in the homogeneous limit
    let g = mzfringe::compensation::optimal_gamma(
        &Preset::Ideal.beam(),
        &Preset::Ideal.cloud(),
        0.65,
        &grid,
        None,
    )
    .unwrap();
    assert!((g - 1.0).abs() < 1e-3);
}
