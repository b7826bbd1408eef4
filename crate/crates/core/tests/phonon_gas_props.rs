use phonon_bec::phonon_gas::{boson_number_finite, rho_crit, rho_fr, Dispersion, FugacityExcess, LatticeModes};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn box_number_decreases_in_fugacity(l in 4.0f64..20.0, beta in 0.3f64..3.0, u1 in 1e-6f64..5.0, ratio in 1.01f64..10.0) {
        let d = Dispersion::default_massive();
        let modes = LatticeModes::new(&d, l, beta).unwrap();
        let lo = boson_number_finite(&modes, &d, FugacityExcess(u1), 0.0).unwrap();
        let hi = boson_number_finite(&modes, &d, FugacityExcess(u1 * ratio), 0.0).unwrap();
        prop_assert!(hi.total < lo.total);
        prop_assert!(hi.nonzero <= lo.nonzero && hi.zero_mode < lo.zero_mode);
    }

    #[test]
    fn free_density_decreases_below_critical(beta in 0.3f64..3.0, u1 in 1e-8f64..3.0, ratio in 1.05f64..10.0) {
        let d = Dispersion::default_massive();
        let rc = rho_crit(&d, beta).unwrap();
        let a = rho_fr(&d, beta, FugacityExcess(u1)).unwrap();
        let b = rho_fr(&d, beta, FugacityExcess(u1 * ratio)).unwrap();
        prop_assert!(b < a && a < rc && b > 0.0);
    }

    #[test]
    fn lattice_density_approaches_continuum(beta in 0.5f64..2.0) {
        // L^{-d} times the nonzero-mode number tends to rho_fr at y = 2.
        let d = Dispersion::default_massive();
        let u = FugacityExcess(1.0);
        let rho = rho_fr(&d, beta, u).unwrap();
        let mut last = f64::INFINITY;
        for l in [5.0, 10.0, 20.0, 40.0] {
            let modes = LatticeModes::new(&d, l, beta).unwrap();
            let n = boson_number_finite(&modes, &d, u, 0.0).unwrap();
            let gap = ((n.total / modes.volume()) - rho).abs() / rho;
            prop_assert!(gap < last, "L = {l}: {gap} !< {last}");
            last = gap;
        }
    }
}
