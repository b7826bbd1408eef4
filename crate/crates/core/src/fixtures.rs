//! Reproducible fixtures: the canonical coupled system and seeded random
//! inputs for randomized checks.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoupling::CoupledSystem;
use crate::error::Result;
use crate::hubbard::{CouplingFamily, HubbardSystem};
use crate::linalg::{FermionSector, Matrix};
use crate::phonon_gas::Dispersion;
use crate::test_function::{GaussianBump, TestFunction};

pub const DEFAULT_SEED: u64 = 0x5eed_0f_b05e;

/// Parameters of the two-site coupled fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledFixture {
    pub num_sites: usize,
    pub num_electrons: usize,
    pub hopping_diagonal: Vec<f64>,
    pub repulsion: f64,
    pub alpha: f64,
    pub beta: f64,
    pub cutoff: f64,
    pub uv_width: f64,
    pub box_size: f64,
    pub lattice_points: Vec<Vec<i64>>,
}

impl Default for CoupledFixture {
    /// Two sites, two electrons, `T = diag(0, 0.3)`, `U = 2`, two modes at
    /// `n = (1,0,0)` and `(-1,1,0)` in a box of side `2 pi`.
    fn default() -> Self {
        Self {
            num_sites: 2,
            num_electrons: 2,
            hopping_diagonal: vec![0.0, 0.3],
            repulsion: 2.0,
            alpha: 0.2,
            beta: 1.0,
            cutoff: 0.5,
            uv_width: 2.0,
            box_size: 2.0 * PI,
            lattice_points: vec![vec![1, 0, 0], vec![-1, 1, 0]],
        }
    }
}

impl CoupledFixture {
    pub fn hubbard(&self) -> Result<HubbardSystem> {
        let hop = Matrix::from_diagonal(&DVector::from_iterator(
            self.hopping_diagonal.len(),
            self.hopping_diagonal.iter().map(|&t| Complex64::new(t, 0.0)),
        ));
        HubbardSystem::new(FermionSector::new(self.num_sites, self.num_electrons)?, hop, self.repulsion, self.alpha, self.beta)
    }

    pub fn family(&self, dim: usize) -> Result<CouplingFamily> {
        CouplingFamily::on_chain(self.num_sites, dim, self.uv_width, self.cutoff)
    }

    pub fn build(&self, disp: &Dispersion) -> Result<CoupledSystem> {
        CoupledSystem::from_lattice(self.hubbard()?, &self.family(disp.dim)?, disp, self.box_size, &self.lattice_points)
    }
}

/// `exp(-|k - (1.5, 0, 0)|^2 / (2 * 0.4^2))`.
pub fn reference_bump() -> TestFunction {
    TestFunction::gaussian(vec![1.5, 0.0, 0.0], 0.4, Complex64::new(1.0, 0.0)).expect("valid bump")
}

/// Seeded generator for randomized fixtures.
#[derive(Debug, Clone)]
pub struct FixtureRng(ChaCha8Rng);

impl FixtureRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.random_range(lo..hi)
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform(lo.ln(), hi.ln()).exp()
    }

    pub fn complex(&mut self, radius: f64) -> Complex64 {
        Complex64::from_polar(radius * self.uniform(0.0, 1.0).sqrt(), self.uniform(0.0, 2.0 * PI))
    }

    /// Dense complex matrix with entries in the disc of the given radius.
    pub fn matrix(&mut self, n: usize, radius: f64) -> Matrix {
        Matrix::from_fn(n, n, |_, _| self.complex(radius))
    }

    pub fn vector(&mut self, n: usize, radius: f64) -> Vec<Complex64> {
        (0..n).map(|_| self.complex(radius)).collect()
    }

    /// Scalar test function made of `bumps` Gaussians with centres in
    /// `[-reach, reach]^d`, widths in `[0.3, 0.8]` and amplitudes in the unit disc.
    pub fn test_function(&mut self, dim: usize, bumps: usize, reach: f64) -> TestFunction {
        let list = (0..bumps)
            .map(|_| GaussianBump {
                center: (0..dim).map(|_| self.uniform(-reach, reach)).collect(),
                width: self.uniform(0.3, 0.8),
                amplitude: self.complex(1.0),
                component: 0,
            })
            .collect();
        TestFunction::new(dim, 1, list).expect("valid bumps")
    }

    /// Fiber label with `sqrt(r) < sqrt_r_max` and `theta` in `[0, 2 pi)`.
    pub fn fiber_label(&mut self, sqrt_r_max: f64) -> (f64, f64) {
        let s = self.uniform(1e-3, sqrt_r_max);
        (s * s, self.uniform(0.0, 2.0 * PI))
    }

    /// `(L, beta, rho)` spanning normal and condensed regimes.
    pub fn density_fixture(&mut self) -> (f64, f64, f64) {
        (self.uniform(4.0, 30.0), self.log_uniform(0.5, 2.0), self.log_uniform(1e-3, 2.0))
    }
}
