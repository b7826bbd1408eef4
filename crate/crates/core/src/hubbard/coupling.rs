//! Electron–phonon coupling functions `lambda_x` and their weighted overlaps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, BosonMode, HermitianOperator, Matrix};
use crate::phonon_gas::{momentum_norm, Dispersion};
use crate::quadrature::{integrate, integrate_ball, integrate_from_zero_smoothed, Tolerance};
use crate::special::{plane_wave_sphere_average, unit_sphere_area};
use crate::test_function::{MomentumProfile, TestFunction};

/// Tolerance for negative eigenvalues of a Gram matrix, relative to its
/// largest entry.
pub const GRAM_TOL: f64 = 1e-10;

/// `lambda_x(k) = e^{-i k.a_x} e^{-|k|^2 / (2 Lambda^2)} 1[|k| >= kappa]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingFamily {
    /// Site positions `a_x`.
    pub positions: Vec<Vec<f64>>,
    /// Ultraviolet width `Lambda`.
    pub uv_width: f64,
    /// Infrared cutoff `kappa >= 0`.
    pub cutoff: f64,
}

impl CouplingFamily {
    pub fn new(positions: Vec<Vec<f64>>, uv_width: f64, cutoff: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::domain("coupling family needs at least one site"));
        }
        let dim = positions[0].len();
        if dim == 0 {
            return Err(Error::domain("site positions need a positive dimension"));
        }
        if let Some(p) = positions.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: p.len() });
        }
        if !(uv_width > 0.0) || !uv_width.is_finite() {
            return Err(Error::domain(format!("UV width must be positive, got {uv_width}")));
        }
        if !(cutoff >= 0.0) || !cutoff.is_finite() {
            return Err(Error::domain(format!("infrared cutoff must be >= 0, got {cutoff}")));
        }
        Ok(Self { positions, uv_width, cutoff })
    }

    /// Sites at `a_x = (x, 0, ..., 0)`.
    pub fn on_chain(num_sites: usize, dim: usize, uv_width: f64, cutoff: f64) -> Result<Self> {
        let positions = (0..num_sites)
            .map(|x| {
                let mut a = vec![0.0; dim];
                if dim > 0 {
                    a[0] = x as f64;
                }
                a
            })
            .collect();
        Self::new(positions, uv_width, cutoff)
    }

    pub fn num_sites(&self) -> usize {
        self.positions.len()
    }

    pub fn dim(&self) -> usize {
        self.positions[0].len()
    }

    fn check_site(&self, x: usize) -> Result<()> {
        if x >= self.num_sites() {
            return Err(Error::domain(format!("site {x} out of range 0..{}", self.num_sites())));
        }
        Ok(())
    }

    /// `e^{-k^2 / (2 Lambda^2)} 1[k >= kappa]`.
    pub fn envelope(&self, k: f64) -> f64 {
        if k < self.cutoff {
            0.0
        } else {
            (-0.5 * k * k / (self.uv_width * self.uv_width)).exp()
        }
    }

    /// `lambda_x(k)`.
    pub fn value(&self, site: usize, k: &[f64]) -> Complex64 {
        let env = self.envelope(momentum_norm(k));
        if env == 0.0 {
            return c(0.0, 0.0);
        }
        let phase: f64 = k.iter().zip(&self.positions[site]).map(|(a, b)| a * b).sum();
        Complex64::from_polar(env, -phase)
    }

    pub fn separation(&self, x: usize, y: usize) -> f64 {
        let (a, b) = (&self.positions[x], &self.positions[y]);
        a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
    }

    /// Radius beyond which `eps(k)^{2m} e^{-k^2 / Lambda^2} k^{d-1}` is
    /// below `e^{-46}`.
    fn uv_radius(&self, disp: &Dispersion, power: f64) -> f64 {
        let mut k = 6.0 * self.uv_width;
        let d1 = self.dim() as f64 - 1.0;
        loop {
            let eps = disp.boson_energy(k).max(1e-300);
            let log = -k * k / (self.uv_width * self.uv_width) + 2.0 * power * eps.ln() + d1 * k.max(1.0).ln();
            if log < -46.0 || k > 1e6 {
                return k;
            }
            k *= 1.2;
        }
    }
}

/// Fails when `int_{|k| small} eps(k)^{2m} dk` diverges: `eps(0) = 0`,
/// no cutoff, and `d + 2 m p <= 0` for `eps ~ k^p`.
fn check_infrared(family: &CouplingFamily, disp: &Dispersion, power: f64) -> Result<()> {
    let gap = disp.boson_energy(0.0);
    if gap < 0.0 {
        return Err(Error::domain(format!("phonon energy omega(0) - mu = {gap} is negative")));
    }
    if family.cutoff > 0.0 || gap > 0.0 || power >= 0.0 {
        return Ok(());
    }
    let p = disp.profile.small_k_exponent();
    let d = disp.dim as f64;
    if d + 2.0 * power * p <= 0.0 {
        return Err(Error::InfraredDivergence(format!(
            "omega^{power} lambda is not square integrable at k = 0 without a cutoff (d = {d}, omega ~ k^{p})"
        )));
    }
    Ok(())
}

fn overlap_tolerance() -> Tolerance {
    Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 8000 }
}

/// `<omega^m lambda_x, omega^m lambda_y> = int eps(k)^{2m} conj(lambda_x(k)) lambda_y(k) dk`
/// with `eps = omega - mu`, reduced to a radial integral with the closed-form
/// spherical average of `e^{i k.(a_x - a_y)}`.
pub fn coupling_overlap(family: &CouplingFamily, disp: &Dispersion, power: f64, x: usize, y: usize) -> Result<Complex64> {
    family.check_site(x)?;
    family.check_site(y)?;
    if family.dim() != disp.dim {
        return Err(Error::DimensionMismatch { expected: disp.dim, actual: family.dim() });
    }
    if disp.dim > 3 {
        return Err(Error::domain(format!("overlaps are implemented for d <= 3, got {}", disp.dim)));
    }
    check_infrared(family, disp, power)?;
    let dist = family.separation(x, y);
    let d1 = disp.dim as i32 - 1;
    let lambda2 = family.uv_width * family.uv_width;
    let integrand = |k: f64| {
        if k <= 0.0 {
            return 0.0;
        }
        let eps = disp.boson_energy(k);
        let weight = (2.0 * power * eps.ln() - k * k / lambda2).exp();
        weight * k.powi(d1) * plane_wave_sphere_average(disp.dim, k * dist)
    };
    let k_max = family.uv_radius(disp, power);
    let tol = overlap_tolerance();
    let radial = if family.cutoff > 0.0 {
        if family.cutoff >= k_max {
            return Ok(c(0.0, 0.0));
        }
        integrate(integrand, family.cutoff, k_max, tol)?
    } else {
        integrate_from_zero_smoothed(integrand, k_max, 4, tol)?
    };
    Ok(c(unit_sphere_area(disp.dim) * radial.value, 0.0))
}

/// Gram matrix `G_xy = <omega^m lambda_x, omega^m lambda_y>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub power: f64,
    pub cutoff: f64,
    entries: Matrix,
}

impl OverlapMatrix {
    /// Validates Hermiticity and positive semidefiniteness.
    pub fn from_entries(power: f64, cutoff: f64, entries: Matrix) -> Result<Self> {
        let op = HermitianOperator::new(entries)?;
        let scale = op.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let lowest = op.eigh().min_value();
        if lowest < -GRAM_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::contract(format!("overlap matrix is not positive semidefinite (eigenvalue {lowest})")));
        }
        Ok(Self { power, cutoff, entries: op.into_matrix() })
    }

    /// Continuum overlaps by quadrature; entries computed in parallel.
    pub fn continuum(family: &CouplingFamily, disp: &Dispersion, power: f64) -> Result<Self> {
        let n = family.num_sites();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (x..n).map(move |y| (x, y))).collect();
        let values: Vec<Complex64> = pairs
            .par_iter()
            .map(|&(x, y)| coupling_overlap(family, disp, power, x, y))
            .collect::<Result<_>>()?;
        let mut m = Matrix::zeros(n, n);
        for (&(x, y), v) in pairs.iter().zip(values) {
            m[(x, y)] = v;
            m[(y, x)] = v.conj();
        }
        Self::from_entries(power, family.cutoff, m)
    }

    /// Discrete overlaps `sum_j eps_j^{2m} conj(lambda_{x,j}) lambda_{y,j}` over
    /// a finite mode set with `eps_j = omega_j - mu`.
    pub fn discrete(modes: &[BosonMode], chemical_potential: f64, power: f64, cutoff: f64) -> Result<Self> {
        let n = modes.first().map_or(0, |m| m.couplings.len());
        if n == 0 {
            return Err(Error::domain("modes carry no site couplings"));
        }
        let mut m = Matrix::zeros(n, n);
        for mode in modes {
            if mode.couplings.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: mode.couplings.len() });
            }
            let eps = mode.frequency - chemical_potential;
            if mode.couplings.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            if !(eps > 0.0) && power < 0.0 {
                return Err(Error::InfraredDivergence(format!("coupled mode with energy {eps} and power {power}")));
            }
            let w = eps.powf(2.0 * power);
            for x in 0..n {
                for y in 0..n {
                    m[(x, y)] += mode.couplings[x].conj() * mode.couplings[y] * w;
                }
            }
        }
        Self::from_entries(power, cutoff, m)
    }

    pub fn num_sites(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.entries[(x, y)]
    }

    /// `sum_{x,y} conj(v_x) G_xy v_y`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Result<Complex64> {
        if v.len() != self.num_sites() {
            return Err(Error::DimensionMismatch { expected: self.num_sites(), actual: v.len() });
        }
        let mut acc = c(0.0, 0.0);
        for x in 0..v.len() {
            for y in 0..v.len() {
                acc += v[x].conj() * self.entries[(x, y)] * v[y];
            }
        }
        Ok(acc)
    }
}

/// `w_x = Re <eps^{-1/2} f, eps^{-1/2} lambda_x> = Re int conj(f_0(k)) lambda_x(k) / eps(k) dk`,
/// the site weights of `n~(f) = sum_x w_x n_x`. Couplings act on internal
/// component 0 only.
pub fn phase_weights(family: &CouplingFamily, disp: &Dispersion, f: &TestFunction) -> Result<Vec<f64>> {
    f.check_dim(disp.dim)?;
    if family.dim() != disp.dim {
        return Err(Error::DimensionMismatch { expected: disp.dim, actual: family.dim() });
    }
    check_infrared(family, disp, -0.5)?;
    if f.is_zero() {
        return Ok(vec![0.0; family.num_sites()]);
    }
    let r_hi = f.support_radius().min(family.uv_radius(disp, -0.5));
    let r_lo = family.cutoff;
    if r_lo >= r_hi {
        return Ok(vec![0.0; family.num_sites()]);
    }
    (0..family.num_sites())
        .into_par_iter()
        .map(|x| {
            let reach = momentum_norm(&family.positions[x]);
            let res = integrate_ball(
                disp.dim,
                r_lo,
                r_hi,
                |k: &[f64]| {
                    let eps = disp.boson_energy(momentum_norm(k));
                    (f.component_value(0, k).conj() * family.value(x, k) / eps).re
                },
                |k| f.angular_order(k) + (2.0 * k * reach) as usize + 8,
                if r_lo == 0.0 { 2 } else { 1 },
                Tolerance { abs: 1e-14, rel: 1e-11, max_intervals: 4000 },
            )?;
            Ok(res.value)
        })
        .collect()
}

/// Discrete counterpart of [`phase_weights`] over a finite mode set.
pub fn phase_weights_discrete(modes: &[BosonMode], chemical_potential: f64, f: &[Complex64]) -> Result<Vec<f64>> {
    if f.len() != modes.len() {
        return Err(Error::DimensionMismatch { expected: modes.len(), actual: f.len() });
    }
    let n = modes.first().map_or(0, |m| m.couplings.len());
    let mut w = vec![0.0; n];
    for (mode, fj) in modes.iter().zip(f) {
        let eps = mode.frequency - chemical_potential;
        if *fj == c(0.0, 0.0) || mode.couplings.iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        if !(eps > 0.0) {
            return Err(Error::InfraredDivergence(format!("mode energy {eps} in an omega^(-1/2) pairing")));
        }
        for (wx, lam) in w.iter_mut().zip(&mode.couplings) {
            *wx += (fj.conj() * lam).re / eps;
        }
    }
    Ok(w)
}
