use std::f64::consts::PI;

use conic_core::acceptance::oracles::bessel_zero;
use conic_core::mode_spectral::{solve_modes, solve_spectrum, verify_eigenvalue_bound, ModeEigenproblem, SpectralError};
use proptest::prelude::*;

#[test]
fn flat_cone_matches_bessel_zeros() {
    for beta in [-0.3, -0.6] {
        for k in 0..3i64 {
            let nu = k as f64 / (1.0 + beta);
            let spectrum = solve_spectrum(&ModeEigenproblem::flat_cone(beta, k, 1.0, 256).unwrap(), 3).unwrap();
            for (n, e) in spectrum.eigenvalues.iter().enumerate() {
                let want = bessel_zero(nu, n + 1).powi(2);
                assert!((e.value - want).abs() < 1e-6 * want, "beta {beta} k {k} n {n}: {} vs {want}", e.value);
            }
        }
    }
}

#[test]
fn cusp_zero_mode_has_no_discrete_spectrum() {
    let p = ModeEigenproblem::cusp(0, 1e-3, 1.0, 256, 0.0).unwrap();
    assert_eq!(solve_spectrum(&p, 1).unwrap_err(), SpectralError::NoDiscreteSpectrum);
}

#[test]
fn parallel_modes_match_serial() {
    let problems: Vec<_> = (0..4).map(|k| ModeEigenproblem::football(-0.4, 1.0, k, 128).unwrap()).collect();
    let parallel = solve_modes(&problems, 3);
    for (p, r) in problems.iter().zip(parallel) {
        assert_eq!(r.unwrap(), solve_spectrum(p, 3).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn football_first_eigenvalue_is_twice_the_curvature(beta in -0.9f64..-0.1, curvature in 0.2f64..5.0) {
        let report = verify_eigenvalue_bound(beta, curvature, &[0, 1, 2], 256).unwrap();
        let zero = report.modes.iter().find(|m| m.mode == 0).unwrap();
        prop_assert!(zero.equality, "{:?}", zero);
        prop_assert!(report.modes.iter().filter(|m| m.mode != 0).all(|m| m.margin > m.tolerance));
    }

    #[test]
    fn flat_cone_eigenvalues_scale_inversely_with_area(beta in -0.9f64..-0.1, radius in 0.5f64..4.0) {
        let unit = solve_spectrum(&ModeEigenproblem::flat_cone(beta, 1, 1.0, 128).unwrap(), 1).unwrap();
        let scaled = solve_spectrum(&ModeEigenproblem::flat_cone(beta, 1, radius, 128).unwrap(), 1).unwrap();
        let ratio = scaled.eigenvalues[0].value * radius * radius / unit.eigenvalues[0].value;
        prop_assert!((ratio - 1.0).abs() < 1e-9, "{}", ratio);
    }
}

#[test]
fn football_mode_zero_is_cosine_profile() {
    let report = verify_eigenvalue_bound(-0.5, PI, &[0], 256).unwrap();
    assert!(report.rigidity_profile_error < 1e-3, "{}", report.rigidity_profile_error);
}
