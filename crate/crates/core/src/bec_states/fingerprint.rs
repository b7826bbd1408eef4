//! Fingerprints `e_f(r, theta)` separate the fibers: two probes with zero
//! modes `1 / sqrt(c)` and `i / sqrt(c)` read off `sqrt(r) cos(theta)` and
//! `sqrt(r) sin(theta)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CondensatePhase, FreeBosonForms};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::phonon_gas::Dispersion;
use crate::test_function::TestFunction;

/// Relative singular-value threshold for the injectivity rank.
pub const RANK_TOL: f64 = 1e-10;

/// Origin-centred bumps `f1, f2` of the given width with `sqrt(c) f1^(0) = 1`
/// and `sqrt(c) f2^(0) = i`.
pub fn fingerprint_probes(disp: &Dispersion, amplitude: f64, width: f64) -> Result<(TestFunction, TestFunction)> {
    if !(amplitude > 0.0) || !(width > 0.0) {
        return Err(Error::domain("probes need positive condensate amplitude and width"));
    }
    let scale = 1.0 / (amplitude.sqrt() * width.powi(disp.dim as i32));
    let make = |z: Complex64| {
        TestFunction::new(
            disp.dim,
            disp.internal_components,
            vec![crate::test_function::GaussianBump { center: vec![0.0; disp.dim], width, amplitude: z, component: 0 }],
        )
    };
    Ok((make(Complex64::new(scale, 0.0))?, make(Complex64::new(0.0, scale))?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveredPhase {
    pub r: f64,
    /// `None` at `r = 0`, where every angle gives the same fiber.
    pub theta: Option<f64>,
}

/// Inverts the probe fingerprints `e1 = exp(i sqrt(r) cos theta)` and
/// `e2 = exp(-i sqrt(r) sin theta)` on the branch `sqrt(r) < pi`.
pub fn fingerprint_recover(e1: Complex64, e2: Complex64) -> Result<RecoveredPhase> {
    for e in [e1, e2] {
        if !((e.norm() - 1.0).abs() <= 1e-9) {
            return Err(Error::domain(format!("fingerprint {e} is not a phase")));
        }
    }
    let x = e1.arg();
    let y = -e2.arg();
    let r = x * x + y * y;
    let theta = if r == 0.0 { None } else { Some(y.atan2(x).rem_euclid(2.0 * std::f64::consts::PI)) };
    Ok(RecoveredPhase { r, theta })
}

/// `|psi^{r,theta}(W(e^{i alpha} f)) - psi^{r,theta+alpha}(W(f))|`.
pub fn gauge_shift_check(forms: &FreeBosonForms, phase: &CondensatePhase, f: &TestFunction, alpha: f64) -> Result<f64> {
    let turned = f.scaled(Complex64::from_polar(1.0, alpha));
    let lhs = forms.psi_fiber(phase, &turned)?;
    let rhs = forms.psi_fiber(&phase.rotated(alpha), f)?;
    Ok((lhs - rhs).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub atoms: usize,
    pub samples: usize,
    pub rank: usize,
    pub singular_max: f64,
    pub singular_min: f64,
}

impl InjectivityReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.atoms
    }
}

/// Rank of `w -> sum_i w_i exp(i (k1 sqrt(r_i) cos theta_i + k2 sqrt(r_i) sin theta_i))`
/// sampled on the `(k1, k2)` grid: a finite stand-in for the statement that a
/// measure on fibers is fixed by its fingerprint transform.
pub fn injectivity_rank(atoms: &[(f64, f64)], grid: &[(f64, f64)]) -> Result<InjectivityReport> {
    if atoms.is_empty() || grid.len() < atoms.len() {
        return Err(Error::domain("need at least as many samples as atoms"));
    }
    let m = Matrix::from_fn(grid.len(), atoms.len(), |s, a| {
        let (r, theta) = atoms[a];
        let (k1, k2) = grid[s];
        let sr = r.sqrt();
        Complex64::from_polar(1.0, k1 * sr * theta.cos() + k2 * sr * theta.sin())
    });
    let sv = m.singular_values();
    let singular_max = sv.iter().cloned().fold(0.0, f64::max);
    let singular_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * singular_max).count();
    Ok(InjectivityReport { atoms: atoms.len(), samples: grid.len(), rank, singular_max, singular_min })
}
