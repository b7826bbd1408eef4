use num_complex::Complex64;

use super::{check_dim, c, Eigh, HermitianOperator, Matrix};
use crate::error::{Error, Result};

/// Thermal state `e^{-beta H} / Z`, kept in the eigenbasis of `H`.
#[derive(Debug, Clone)]
pub struct GibbsState {
    eigh: Eigh,
    beta: f64,
    /// Lowest eigenvalue; weights are computed relative to it.
    shift: f64,
    log_shifted_partition: f64,
    /// `ln Z`.
    pub log_partition: f64,
}

/// Gibbs state of a Hermitian operator at inverse temperature `beta > 0`.
pub fn gibbs(h: &HermitianOperator, beta: f64) -> Result<GibbsState> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("inverse temperature must be positive and finite, got {beta}")));
    }
    let eigh = h.eigh();
    let shift = eigh.min_value();
    let shifted_z: f64 = eigh
        .blocks
        .iter()
        .flat_map(|b| b.values.iter())
        .map(|&e| (-beta * (e - shift)).exp())
        .sum();
    let log_shifted_partition = shifted_z.ln();
    Ok(GibbsState {
        log_partition: log_shifted_partition - beta * shift,
        eigh,
        beta,
        shift,
        log_shifted_partition,
    })
}

impl GibbsState {
    pub fn dim(&self) -> usize {
        self.eigh.dim()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn partition_function(&self) -> f64 {
        self.log_partition.exp()
    }

    pub fn eigh(&self) -> &Eigh {
        &self.eigh
    }

    fn weight(&self, e: f64) -> f64 {
        (-self.beta * (e - self.shift) - self.log_shifted_partition).exp()
    }

    /// Boltzmann weights `e^{-beta E_i}/Z` in ascending energy order.
    pub fn populations(&self) -> Vec<f64> {
        self.eigh.values_sorted().into_iter().map(|e| self.weight(e)).collect()
    }

    /// `rho = e^{-beta H} / Z` as a dense matrix.
    pub fn density_matrix(&self) -> Matrix {
        self.eigh.apply(|e| c(self.weight(e), 0.0))
    }

    /// `Tr[A rho]`.
    pub fn expectation(&self, a: &Matrix) -> Result<Complex64> {
        check_dim(self.dim(), a.nrows())?;
        check_dim(self.dim(), a.ncols())?;
        Ok(self.eigh.weighted_trace(a, |e| self.weight(e)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs, trace};

    /// `sum_k (-beta H)^k / k!` with `k <= 60`.
    fn series_exp(h: &Matrix, beta: f64) -> Matrix {
        let n = h.nrows();
        let mut term = Matrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..=60 {
            term = &term * h * c(-beta / k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn zero_hamiltonian_is_maximally_mixed() {
        let g = gibbs(&HermitianOperator::zeros(5), 2.0).unwrap();
        assert!((g.partition_function() - 5.0).abs() < 1e-13);
        let rho = g.density_matrix();
        assert!(max_abs(&(rho - Matrix::identity(5, 5) * c(0.2, 0.0))) < 1e-15);
    }

    #[test]
    fn two_level_partition_function() {
        let g = gibbs(&HermitianOperator::from_real_diagonal(&[0.0, 2.0]), 1.0).unwrap();
        assert!((g.partition_function() - (1.0 + (-2.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn matches_series_oracle() {
        let h = crate::linalg::tests::random_hermitian(6, 42);
        let op = HermitianOperator::new(h.clone()).unwrap();
        let g = gibbs(&op, 0.8).unwrap();
        let e = series_exp(&h, 0.8);
        let z = trace(&e).re;
        assert!((g.partition_function() - z).abs() < 1e-12 * z);
        let rho = e * c(1.0 / z, 0.0);
        assert!(max_abs(&(g.density_matrix() - rho)) < 1e-12);
    }

    #[test]
    fn state_properties() {
        let h = crate::linalg::tests::random_hermitian(7, 8);
        let op = HermitianOperator::new(h.clone()).unwrap();
        let g = gibbs(&op, 3.0).unwrap();
        let rho = g.density_matrix();
        assert!((trace(&rho) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(max_abs(&commutator(&rho, &h)) <= 1e-10 * max_abs(&h));
        let eig = HermitianOperator::new(rho).unwrap().eigh();
        assert!(eig.min_value() > -1e-14);
    }

    #[test]
    fn large_energies_do_not_overflow() {
        let g = gibbs(&HermitianOperator::from_real_diagonal(&[1000.0, 1001.0]), 5.0).unwrap();
        let p = g.populations();
        assert!((p[0] + p[1] - 1.0).abs() < 1e-14);
        assert!((g.log_partition - (-5000.0 + (1.0 + (-5.0f64).exp()).ln())).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_beta() {
        assert!(gibbs(&HermitianOperator::zeros(2), 0.0).is_err());
    }
}
