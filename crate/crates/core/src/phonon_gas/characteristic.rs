//! Characteristic functional of the free phonon Gibbs state in a finite box.

use serde::{Deserialize, Serialize};

use super::density::{bose_factor, FugacityExcess};
use super::dispersion::Dispersion;
use super::lattice::{lattice_points_in_box, LatticeModes};
use crate::error::{Error, Result};
use crate::test_function::{MomentumProfile, TestFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteVolumeCharacteristic {
    /// Zero-mode part `(2 pi / L)^d |f^(0)|^2 (y + 1) / (y - 1)`.
    pub zero_mode: f64,
    /// `(2 pi / L)^d sum_{k != 0} |f(k)|^2 (y e^{beta F} + 1) / (y e^{beta F} - 1)`.
    pub nonzero: f64,
    /// Quadratic form `I_L = zero_mode + nonzero`.
    pub total: f64,
    /// State value on the Weyl operator, `exp(-I_L / 4)`.
    pub weyl: f64,
    pub lattice_points: usize,
}

/// Evaluates the quadratic form of the finite-box Gibbs state on `f`, with
/// `f` sampled at the lattice momenta and its zero mode taken in closed form.
pub fn finite_volume_characteristic(
    modes: &LatticeModes,
    disp: &Dispersion,
    f: &TestFunction,
    u: FugacityExcess,
) -> Result<FiniteVolumeCharacteristic> {
    if !(u.0 > 0.0) {
        return Err(Error::domain(format!("fugacity must exceed 1 (got y - 1 = {})", u.0)));
    }
    f.check_dim(modes.dim)?;
    let h = modes.spacing();
    let cell = h.powi(modes.dim as i32);
    let beta = modes.beta;
    // (y + 1) / (y - 1) = 1 + 2 / (y - 1)
    let zero_mode = cell * f.zero_mode_norm_sq() * (1.0 + 2.0 / u.0);

    let (lo, hi) = f.support_box();
    let points = if f.is_zero() { Vec::new() } else { lattice_points_in_box(h, &lo, &hi) };
    let mut nonzero = 0.0;
    let mut count = 0;
    let mut k = vec![0.0; modes.dim];
    for n in &points {
        if n.iter().all(|&x| x == 0) {
            continue;
        }
        for (ki, &ni) in k.iter_mut().zip(n) {
            *ki = h * ni as f64;
        }
        let w = f.norm_sq_at(&k);
        if w == 0.0 {
            continue;
        }
        let kernel = 1.0 + 2.0 * bose_factor(u, beta * disp.excess_at(&k));
        nonzero += w * kernel;
        count += 1;
    }
    nonzero *= cell;
    let total = zero_mode + nonzero;
    Ok(FiniteVolumeCharacteristic { zero_mode, nonzero, total, weyl: (-0.25 * total).exp(), lattice_points: count })
}
