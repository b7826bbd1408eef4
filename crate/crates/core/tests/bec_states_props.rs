use std::f64::consts::PI;

use phonon_bec::bec_states::{
    chi_average, e_fingerprint, fiber_density_with, fingerprint_probes, fingerprint_recover, gauge_shift_check,
    injectivity_rank, CondensatePhase, FreeBosonForms,
};
use phonon_bec::fixtures::FixtureRng;
use phonon_bec::phonon_gas::Dispersion;
use proptest::prelude::*;

fn phase(r: f64, theta: f64, rho0: f64) -> CondensatePhase {
    CondensatePhase::new(r, theta, rho0, &Dispersion::default_massive()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fiber_values_are_bounded(seed: u64, r in 0.0f64..20.0, theta in 0.0f64..(2.0 * PI), rho0 in 0.01f64..2.0) {
        let d = Dispersion::default_massive();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let f = FixtureRng::new(seed).test_function(3, 2, 1.5);
        let p = phase(r, theta, rho0);
        prop_assert!((e_fingerprint(&p, &f).unwrap().norm() - 1.0).abs() <= 1e-14);
        prop_assert!(forms.psi_fiber(&p, &f).unwrap().norm() <= 1.0 + 1e-15);
        let bec = forms.psi_bec(&f, rho0).unwrap();
        prop_assert!(bec > 0.0 && bec <= 1.0);
    }

    #[test]
    fn gauge_covariance(seed: u64, r in 0.0f64..10.0, theta in 0.0f64..(2.0 * PI), alpha in -10.0f64..10.0) {
        let d = Dispersion::default_massive();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let f = FixtureRng::new(seed).test_function(3, 1, 1.5);
        prop_assert!(gauge_shift_check(&forms, &phase(r, theta, 0.3), &f, alpha).unwrap() <= 1e-12);
    }

    #[test]
    fn two_point_is_positive(seed: u64, r in 0.0f64..5.0, theta in 0.0f64..(2.0 * PI)) {
        let d = Dispersion::default_massive();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let f = FixtureRng::new(seed).test_function(3, 2, 1.5);
        let g = forms.two_point(&phase(r, theta, 0.3), &f, &f).unwrap();
        prop_assert!(g.condensate.re >= 0.0 && g.thermal.re >= -1e-12 && g.value.re >= -1e-12);
    }

    #[test]
    fn fingerprints_round_trip(sqrt_r in 1e-3f64..3.1, theta in 0.0f64..(2.0 * PI), rho0 in 0.01f64..2.0) {
        let d = Dispersion::default_massive();
        let p = phase(sqrt_r * sqrt_r, theta, rho0);
        let (f1, f2) = fingerprint_probes(&d, p.amplitude, 0.5).unwrap();
        let rec = fingerprint_recover(e_fingerprint(&p, &f1).unwrap(), e_fingerprint(&p, &f2).unwrap()).unwrap();
        prop_assert!((rec.r - p.r).abs() <= 1e-9);
        let dt = (rec.theta.unwrap() - p.theta + PI).rem_euclid(2.0 * PI) - PI;
        prop_assert!(dt.abs() <= 1e-9);
    }

    #[test]
    fn fiber_density_averages_to_total(rho0 in 0.01f64..2.0, rc in 0.0f64..1.0) {
        let d = Dispersion::default_massive();
        let base = phase(0.0, 0.0, rho0);
        let mean = chi_average(|r, t| fiber_density_with(&base.with_label(r, t).unwrap(), &d, rc));
        prop_assert!((mean - (rho0 + rc)).abs() <= 1e-10);
        prop_assert!((chi_average(|_, _| 1.0) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn distinct_atoms_are_separated(seed: u64, atoms in 2usize..8) {
        let mut rng = FixtureRng::new(seed);
        let labels: Vec<(f64, f64)> = (0..atoms).map(|_| rng.fiber_label(3.0)).collect();
        let grid: Vec<(f64, f64)> = (0..8).flat_map(|i| (0..8).map(move |j| (i as f64 * 0.6 - 2.1, j as f64 * 0.6 - 2.1))).collect();
        prop_assert!(injectivity_rank(&labels, &grid).unwrap().full_rank());
    }
}
