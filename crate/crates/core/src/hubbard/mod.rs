//! Finite Hubbard systems, the phonon-mediated effective Hamiltonian, and
//! electron Gibbs expectations.

mod coupling;

pub use coupling::{
    coupling_overlap, phase_weights, phase_weights_discrete, CouplingFamily, OverlapMatrix, GRAM_TOL,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, check_dim, gibbs, FermionSector, GibbsState, HermitianOperator, Matrix, Spin};

/// Power `m = -1/2` of the overlaps entering the effective Hamiltonian.
pub const EFFECTIVE_POWER: f64 = -0.5;
/// Power `m = -1` of the overlaps entering the infrared phonon number.
pub const INFRARED_POWER: f64 = -1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HubbardSystem {
    sector: FermionSector,
    hopping: Matrix,
    repulsion: f64,
    coupling: f64,
    beta: f64,
}

impl HubbardSystem {
    pub fn new(sector: FermionSector, hopping: Matrix, repulsion: f64, coupling: f64, beta: f64) -> Result<Self> {
        let n = sector.num_sites();
        if hopping.nrows() != n || hopping.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: hopping.nrows().max(hopping.ncols()) });
        }
        let scale = hopping.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let asym = (&hopping - hopping.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > 1e-12 * scale {
            return Err(Error::contract(format!("hopping matrix is not Hermitian (deviation {asym:.3e})")));
        }
        if !(repulsion > 0.0) || !repulsion.is_finite() {
            return Err(Error::domain(format!("repulsion U must be positive, got {repulsion}")));
        }
        if !coupling.is_finite() {
            return Err(Error::domain("coupling alpha must be finite"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!("inverse temperature must be positive, got {beta}")));
        }
        let hopping = (&hopping + hopping.adjoint()) * c(0.5, 0.0);
        Ok(Self { sector, hopping, repulsion, coupling, beta })
    }

    pub fn sector(&self) -> &FermionSector {
        &self.sector
    }

    pub fn num_sites(&self) -> usize {
        self.sector.num_sites()
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    pub fn hopping(&self) -> &Matrix {
        &self.hopping
    }

    pub fn repulsion(&self) -> f64 {
        self.repulsion
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self { coupling, ..self.clone() }
    }

    /// `H_e = sum_{x,y,sigma} T_xy c^dagger_{x sigma} c_{y sigma} + U sum_x n_{x+} n_{x-}`.
    pub fn hamiltonian(&self) -> HermitianOperator {
        let dim = self.dim();
        let n = self.num_sites();
        let mut h = Matrix::zeros(dim, dim);
        for x in 0..n {
            for y in 0..n {
                let t = self.hopping[(x, y)];
                if t == c(0.0, 0.0) {
                    continue;
                }
                for spin in Spin::BOTH {
                    let hop = self.sector.hop(x, y, spin).expect("sites are in range");
                    h += hop * t;
                }
            }
        }
        for i in 0..dim {
            let doubles = (0..n)
                .filter(|&x| self.sector.occupation(i, x, Spin::Up) == 1 && self.sector.occupation(i, x, Spin::Down) == 1)
                .count();
            h[(i, i)] += c(self.repulsion * doubles as f64, 0.0);
        }
        HermitianOperator::symmetrized(h)
    }

    /// Occupations `n_x` of every basis state, `[state][site]`.
    pub fn site_occupations(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.num_sites()).map(|x| self.sector.site_occupation(i, x) as f64).collect())
            .collect()
    }

    fn check_overlaps(&self, overlaps: &OverlapMatrix) -> Result<()> {
        if overlaps.num_sites() != self.num_sites() {
            return Err(Error::DimensionMismatch { expected: self.num_sites(), actual: overlaps.num_sites() });
        }
        Ok(())
    }

    /// `R = sum_{x,y} G_xy n_x n_y`, diagonal in the occupation basis.
    pub fn density_density(&self, overlaps: &OverlapMatrix) -> Result<HermitianOperator> {
        self.check_overlaps(overlaps)?;
        let diag: Vec<f64> = self
            .site_occupations()
            .iter()
            .map(|occ| density_form(overlaps, occ))
            .collect();
        Ok(HermitianOperator::from_real_diagonal(&diag))
    }

    /// `H~_e = H_e - (alpha^2 / 2) R_{-1/2}`.
    pub fn effective_hamiltonian(&self, overlaps: &OverlapMatrix) -> Result<HermitianOperator> {
        if overlaps.power != EFFECTIVE_POWER {
            return Err(Error::contract(format!(
                "effective Hamiltonian needs overlaps with power -1/2, got {}",
                overlaps.power
            )));
        }
        let r = self.density_density(overlaps)?;
        self.hamiltonian().add(&r.scale(-0.5 * self.coupling * self.coupling))
    }

    /// Gibbs state of `H~_e` at the system's inverse temperature.
    pub fn electron_state(&self, overlaps: &OverlapMatrix) -> Result<ElectronGibbs> {
        let h = self.effective_hamiltonian(overlaps)?;
        Ok(ElectronGibbs { state: gibbs(&h, self.beta)?, occupations: self.site_occupations(), coupling: self.coupling })
    }
}

/// `sum_{x,y} Re(G_xy) n_x n_y` for real occupations.
fn density_form(overlaps: &OverlapMatrix, occ: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, nx) in occ.iter().enumerate() {
        for (y, ny) in occ.iter().enumerate() {
            acc += overlaps.get(x, y).re * nx * ny;
        }
    }
    acc
}

/// Electron Gibbs state `e^{-beta H~_e} / Z`.
#[derive(Debug, Clone)]
pub struct ElectronGibbs {
    state: GibbsState,
    occupations: Vec<Vec<f64>>,
    coupling: f64,
}

impl ElectronGibbs {
    pub fn gibbs(&self) -> &GibbsState {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    /// `Tr[A e^{-beta H~_e}] / Z`.
    pub fn expectation(&self, a: &Matrix) -> Result<Complex64> {
        self.state.expectation(a)
    }

    /// Diagonal of `e^{i alpha sum_x w_x n_x}`.
    pub fn phase_diagonal(&self, weights: &[f64]) -> Result<Vec<Complex64>> {
        let n = self.occupations.first().map_or(0, Vec::len);
        if weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: weights.len() });
        }
        Ok(self
            .occupations
            .iter()
            .map(|occ| {
                let ntilde: f64 = occ.iter().zip(weights).map(|(n, w)| n * w).sum();
                Complex64::from_polar(1.0, self.coupling * ntilde)
            })
            .collect())
    }

    /// `psi~_e(e^{i alpha n~(f)} A)` with `n~(f) = sum_x w_x n_x`.
    pub fn dressed_phase_expectation(&self, a: &Matrix, weights: &[f64]) -> Result<Complex64> {
        check_dim(self.dim(), a.nrows())?;
        check_dim(self.dim(), a.ncols())?;
        let phase = self.phase_diagonal(weights)?;
        let mut m = a.clone();
        for (i, p) in phase.iter().enumerate() {
            for j in 0..m.ncols() {
                m[(i, j)] *= *p;
            }
        }
        self.expectation(&m)
    }

    /// `psi~_e(R)` for the overlaps `G`.
    pub fn density_density_expectation(&self, overlaps: &OverlapMatrix) -> Result<f64> {
        let n = self.occupations.first().map_or(0, Vec::len);
        if overlaps.num_sites() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: overlaps.num_sites() });
        }
        let diag: Vec<f64> = self.occupations.iter().map(|occ| density_form(overlaps, occ)).collect();
        let op = HermitianOperator::from_real_diagonal(&diag);
        Ok(self.expectation(op.matrix())?.re)
    }

    /// Infrared phonon number `N_ir = N_i (alpha^2 / 2) psi~_e(R_{-1})`.
    pub fn infrared_number(&self, overlaps: &OverlapMatrix, components: usize) -> Result<f64> {
        if overlaps.power != INFRARED_POWER {
            return Err(Error::contract(format!("infrared number needs overlaps with power -1, got {}", overlaps.power)));
        }
        let r = self.density_density_expectation(overlaps)?;
        Ok(components as f64 * 0.5 * self.coupling * self.coupling * r)
    }
}
