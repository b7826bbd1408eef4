use phonon_bec::decoupling::{build_coupled_operators, dressing_residual, dynamics_invariance_gap};
use phonon_bec::fixtures::{CoupledFixture, FixtureRng};
use phonon_bec::linalg::HermitianOperator;
use phonon_bec::phonon_gas::Dispersion;
use proptest::prelude::*;

fn fixture(alpha: f64) -> phonon_bec::decoupling::CoupledSystem {
    CoupledFixture { alpha, ..CoupledFixture::default() }.build(&Dispersion::default_massive()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn dressing_preserves_spectra(seed: u64, alpha in -0.6f64..0.6) {
        let ops = build_coupled_operators(&fixture(alpha), 3).unwrap();
        prop_assert!(ops.unitarity_defect() <= 1e-10);
        let x = HermitianOperator::symmetrized(FixtureRng::new(seed).matrix(ops.dim(), 1.0));
        let moved = HermitianOperator::symmetrized(&ops.dressing * x.matrix() * ops.dressing.adjoint());
        let (a, b) = (x.eigh().values_sorted(), moved.eigh().values_sorted());
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() <= 1e-10);
        }
    }

    #[test]
    fn coupled_gibbs_state_is_invariant(seed: u64, t in -3.0f64..3.0) {
        let sys = fixture(0.2);
        let n = build_coupled_operators(&sys, 4).unwrap().dim();
        let x = FixtureRng::new(seed).matrix(n, 1.0);
        prop_assert!(dynamics_invariance_gap(&sys, 4, &x, t).unwrap() <= 1e-10);
    }
}

#[test]
fn residual_is_second_order_in_alpha() {
    // residual / alpha^2 settles as alpha shrinks: the truncation error is of
    // higher order than alpha^2.
    let scaled: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&a| dressing_residual(&fixture(a), 6).unwrap().residual / (a * a))
        .collect();
    assert!(scaled.windows(2).all(|w| w[1] <= w[0]), "{scaled:?}");
    assert!(dressing_residual(&fixture(0.0), 6).unwrap().residual <= 1e-12);
}
