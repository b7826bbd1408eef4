use num_complex::Complex64;
use phonon_bec::linalg::{
    anticommutator, commutator, fock_annihilator, frobenius, gibbs, max_abs, trace, BosonMode, HermitianOperator, Matrix,
    Spin, TruncatedBosonSpace,
};
use proptest::prelude::*;

fn hermitian(n: usize, entries: &[(f64, f64)]) -> HermitianOperator {
    let m = Matrix::from_fn(n, n, |i, j| {
        let (a, b) = entries[(i * n + j) % entries.len()];
        Complex64::new(a, b)
    });
    HermitianOperator::symmetrized(m)
}

fn spin(b: bool) -> Spin {
    if b {
        Spin::Up
    } else {
        Spin::Down
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn canonical_anticommutation(sites in 1usize..=3, x in 0usize..3, y in 0usize..3, sx: bool, sy: bool) {
        let (x, y) = (x % sites, y % sites);
        let cx = fock_annihilator(sites, x, spin(sx)).unwrap();
        let cy = fock_annihilator(sites, y, spin(sy)).unwrap();
        let n = cx.nrows();
        let delta = if x == y && sx == sy { 1.0 } else { 0.0 };
        let mixed = anticommutator(&cx, &cy.adjoint()) - Matrix::identity(n, n) * Complex64::new(delta, 0.0);
        prop_assert_eq!(max_abs(&mixed), 0.0);
        prop_assert_eq!(max_abs(&anticommutator(&cx, &cy)), 0.0);
    }

    #[test]
    fn truncated_commutator_below_cap(cap in 1usize..6, modes in 1usize..3, j in 0usize..2, k in 0usize..2) {
        let (j, k) = (j % modes, k % modes);
        let ms = (0..modes).map(|i| BosonMode { frequency: 1.0 + i as f64, couplings: vec![] }).collect();
        let b = TruncatedBosonSpace::new(ms, cap).unwrap();
        let (aj, ak) = (b.annihilator(j).unwrap(), b.annihilator(k).unwrap());
        let comm = commutator(&aj, &ak.adjoint());
        let keep = b.indices_with_occupation_at_most(cap - 1);
        for &r in &keep {
            for &c in &keep {
                let want = if r == c && j == k { 1.0 } else { 0.0 };
                prop_assert!((comm[(r, c)] - Complex64::new(want, 0.0)).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn gibbs_state_is_a_stationary_density(
        n in 1usize..8,
        entries in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..64),
        beta in 0.05f64..5.0,
    ) {
        let h = hermitian(n, &entries);
        let g = gibbs(&h, beta).unwrap();
        let rho = g.density_matrix();
        prop_assert!((trace(&rho) - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        let eig = HermitianOperator::symmetrized(rho.clone()).eigh();
        prop_assert!(eig.min_value() >= -1e-12);
        let scale = frobenius(h.matrix()).max(1.0);
        prop_assert!(frobenius(&commutator(&rho, h.matrix())) <= 1e-10 * scale);
    }

    #[test]
    fn exponential_is_unitary(n in 1usize..8, entries in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..64), t in -4.0f64..4.0) {
        let h = hermitian(n, &entries);
        let u = h.exp_i(t);
        prop_assert!(frobenius(&(u.adjoint() * &u - Matrix::identity(n, n))) <= 1e-12);
    }
}
