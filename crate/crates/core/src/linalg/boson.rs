//! Bosonic modes truncated to at most `n_max` quanta each.
//!
//! Basis index is mixed-radix with mode 0 most significant:
//! `idx = sum_j n_j (n_max + 1)^{M - 1 - j}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{c, HermitianOperator, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BosonMode {
    /// Mode frequency, `>= 0`.
    pub frequency: f64,
    /// Coupling coefficient to each lattice site.
    pub couplings: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedBosonSpace {
    modes: Vec<BosonMode>,
    level_cap: usize,
    dim: usize,
}

impl TruncatedBosonSpace {
    pub fn new(modes: Vec<BosonMode>, level_cap: usize) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::domain("need at least one boson mode"));
        }
        if level_cap == 0 {
            return Err(Error::domain("level cap must be at least 1"));
        }
        if let Some(m) = modes.iter().find(|m| !(m.frequency >= 0.0) || !m.frequency.is_finite()) {
            return Err(Error::domain(format!("mode frequency must be finite and >= 0, got {}", m.frequency)));
        }
        let dim = (level_cap + 1)
            .checked_pow(modes.len() as u32)
            .ok_or_else(|| Error::domain("boson space dimension overflows"))?;
        Ok(Self { modes, level_cap, dim })
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn level_cap(&self) -> usize {
        self.level_cap
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[BosonMode] {
        &self.modes
    }

    /// Occupation numbers of basis state `idx`.
    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        let base = self.level_cap + 1;
        let mut occ = vec![0; self.num_modes()];
        let mut rest = idx;
        for j in (0..self.num_modes()).rev() {
            occ[j] = rest % base;
            rest /= base;
        }
        occ
    }

    fn stride(&self, mode: usize) -> usize {
        (self.level_cap + 1).pow((self.num_modes() - 1 - mode) as u32)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.num_modes() {
            return Err(Error::domain(format!("mode {mode} out of range ({} modes)", self.num_modes())));
        }
        Ok(())
    }

    /// Annihilator `a_j`.
    pub fn annihilator(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let stride = self.stride(mode);
        let mut m = Matrix::zeros(self.dim, self.dim);
        for idx in 0..self.dim {
            let n = (idx / stride) % (self.level_cap + 1);
            if n > 0 {
                m[(idx - stride, idx)] = c((n as f64).sqrt(), 0.0);
            }
        }
        Ok(m)
    }

    /// `a_j^dagger a_j`.
    pub fn mode_number(&self, mode: usize) -> Result<HermitianOperator> {
        self.check_mode(mode)?;
        let diag: Vec<f64> = (0..self.dim).map(|i| self.occupations(i)[mode] as f64).collect();
        Ok(HermitianOperator::from_real_diagonal(&diag))
    }

    /// Total number operator.
    pub fn number(&self) -> HermitianOperator {
        let diag: Vec<f64> = (0..self.dim)
            .map(|i| self.occupations(i).iter().sum::<usize>() as f64)
            .collect();
        HermitianOperator::from_real_diagonal(&diag)
    }

    /// `sum_j (omega_j - mu) a_j^dagger a_j`.
    pub fn hamiltonian(&self, chemical_potential: f64) -> HermitianOperator {
        let diag: Vec<f64> = (0..self.dim)
            .map(|i| {
                self.occupations(i)
                    .iter()
                    .zip(&self.modes)
                    .map(|(&n, m)| n as f64 * (m.frequency - chemical_potential))
                    .sum()
            })
            .collect();
        HermitianOperator::from_real_diagonal(&diag)
    }

    /// Segal field `phi(f) = sum_j (conj(f_j) a_j + f_j a_j^dagger) / sqrt 2`.
    pub fn field(&self, f: &[Complex64]) -> Result<HermitianOperator> {
        if f.len() != self.num_modes() {
            return Err(Error::DimensionMismatch { expected: self.num_modes(), actual: f.len() });
        }
        let mut m = Matrix::zeros(self.dim, self.dim);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for (j, &fj) in f.iter().enumerate() {
            if fj == c(0.0, 0.0) {
                continue;
            }
            let stride = self.stride(j);
            for idx in 0..self.dim {
                let n = (idx / stride) % (self.level_cap + 1);
                if n > 0 {
                    let amp = (n as f64).sqrt() * inv_sqrt2;
                    // <idx - stride| a_j |idx> = sqrt(n)
                    m[(idx - stride, idx)] += fj.conj() * amp;
                    m[(idx, idx - stride)] += fj * amp;
                }
            }
        }
        Ok(HermitianOperator::symmetrized(m))
    }

    /// Weyl operator `W(f) = exp(i phi(f))` on the truncated space.
    pub fn weyl(&self, f: &[Complex64]) -> Result<Matrix> {
        Ok(self.field(f)?.exp_i(1.0))
    }

    /// Basis indices whose every occupation is `<= cap`.
    pub fn indices_with_occupation_at_most(&self, cap: usize) -> Vec<usize> {
        (0..self.dim)
            .filter(|&i| self.occupations(i).iter().all(|&n| n <= cap))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs};

    fn modes(n: usize) -> Vec<BosonMode> {
        (0..n).map(|j| BosonMode { frequency: 1.0 + j as f64, couplings: vec![] }).collect()
    }

    #[test]
    fn number_operator_single_mode() {
        let space = TruncatedBosonSpace::new(modes(1), 3).unwrap();
        let a = space.annihilator(0).unwrap();
        let n = a.adjoint() * &a;
        for i in 0..4 {
            assert!((n[(i, i)] - c(i as f64, 0.0)).norm() < 1e-15);
        }
        assert!(max_abs(&(space.number().matrix() - &n)) < 1e-14);
    }

    #[test]
    fn truncated_ccr_below_cap() {
        let space = TruncatedBosonSpace::new(modes(2), 4).unwrap();
        let keep = space.indices_with_occupation_at_most(3);
        for j in 0..2 {
            for k in 0..2 {
                let aj = space.annihilator(j).unwrap();
                let ak = space.annihilator(k).unwrap();
                let comm = commutator(&aj, &ak.adjoint());
                for &r in &keep {
                    for &s in &keep {
                        let want = if j == k && r == s { 1.0 } else { 0.0 };
                        assert!((comm[(r, s)] - c(want, 0.0)).norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_field_is_zero() {
        let space = TruncatedBosonSpace::new(modes(2), 3).unwrap();
        let phi = space.field(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(max_abs(phi.matrix()), 0.0);
    }

    #[test]
    fn vacuum_weyl_expectation_is_gaussian() {
        // <0| e^{i phi(f)} |0> = e^{-|f|^2/4}; the coherent-state series
        // sum_n |<n|W|0>|^2 = 1 fixes the oracle independently of the matrix
        // exponential: <n|W|0> = e^{-|f|^2/4} (i f / sqrt 2)^n / sqrt(n!).
        let space = TruncatedBosonSpace::new(modes(1), 30).unwrap();
        let f = [Complex64::from_polar(1.0, 0.4)];
        let w = space.weyl(&f).unwrap();
        let want = (-0.25f64).exp();
        assert!((w[(0, 0)] - c(want, 0.0)).norm() < 1e-6);
        let z = c(0.0, 1.0) * f[0] * std::f64::consts::FRAC_1_SQRT_2;
        let mut amp = c(want, 0.0);
        for n in 0..12 {
            assert!((w[(n, 0)] - amp).norm() < 1e-6, "level {n}");
            amp = amp * z / ((n + 1) as f64).sqrt();
        }
    }

    #[test]
    fn hamiltonian_is_diagonal_frequency_sum() {
        let space = TruncatedBosonSpace::new(modes(2), 2).unwrap();
        let h = space.hamiltonian(0.5);
        // state (n0, n1) = (1, 2) has index 1*3 + 2 = 5
        assert!((h.matrix()[(5, 5)] - c(0.5 + 2.0 * 1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TruncatedBosonSpace::new(modes(1), 0).is_err());
        let neg = vec![BosonMode { frequency: -1.0, couplings: vec![] }];
        assert!(TruncatedBosonSpace::new(neg, 2).is_err());
    }
}
