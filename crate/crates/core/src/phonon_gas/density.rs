//! Phonon numbers in a finite box and the continuum densities they converge to.

use serde::{Deserialize, Serialize};

use super::dispersion::Dispersion;
use super::lattice::LatticeModes;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_from_zero_smoothed, Tolerance};
use crate::special::unit_sphere_area;

/// Fugacity stored as `y - 1` so that the condensed regime `y -> 1` keeps
/// full relative precision.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FugacityExcess(pub f64);

impl FugacityExcess {
    pub fn from_fugacity(y: f64) -> Self {
        Self(y - 1.0)
    }

    pub fn fugacity(self) -> f64 {
        1.0 + self.0
    }

    pub fn ln_fugacity(self) -> f64 {
        self.0.ln_1p()
    }
}

/// `1 / (y e^{beta F} - 1)` written as `1 / expm1(ln y + beta F)`.
pub fn bose_factor(u: FugacityExcess, beta_f: f64) -> f64 {
    1.0 / (u.ln_fugacity() + beta_f).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BosonNumber {
    /// `N_{b,L} = N_{b,0} + N_{b,L,1}`.
    pub total: f64,
    /// `N_{b,0} = N_i / (y - 1) + N_ir`: zero mode plus the infrared term.
    pub zero_mode: f64,
    /// `N_{b,L,1}`: all modes `k != 0`.
    pub nonzero: f64,
    /// Part of `nonzero` from modes with every coordinate nonzero.
    pub all_nonzero: f64,
    /// Part of `nonzero` from modes with some zero coordinate.
    pub some_zero: f64,
}

impl BosonNumber {
    pub fn densities(&self, volume: f64) -> Self {
        Self {
            total: self.total / volume,
            zero_mode: self.zero_mode / volume,
            nonzero: self.nonzero / volume,
            all_nonzero: self.all_nonzero / volume,
            some_zero: self.some_zero / volume,
        }
    }
}

/// Exact expected phonon number in the box at fugacity `y = 1 + u` with the
/// electron-induced infrared contribution `infrared` added to the zero mode.
pub fn boson_number_finite(
    modes: &LatticeModes,
    disp: &Dispersion,
    u: FugacityExcess,
    infrared: f64,
) -> Result<BosonNumber> {
    if !(u.0 > 0.0) {
        return Err(Error::domain(format!("fugacity must exceed 1 (got y - 1 = {})", u.0)));
    }
    if !(infrared >= 0.0) {
        return Err(Error::domain(format!("infrared number must be nonnegative, got {infrared}")));
    }
    let ni = disp.components();
    let beta = modes.beta;
    let (a, b) = modes.radial_sum_split(|k| bose_factor(u, beta * disp.excess(k)));
    let all_nonzero = ni * a;
    let some_zero = ni * b;
    let zero_mode = ni / u.0 + infrared;
    let nonzero = all_nonzero + some_zero;
    Ok(BosonNumber { total: zero_mode + nonzero, zero_mode, nonzero, all_nonzero, some_zero })
}

/// Smallest radius beyond which the Bose integrand is negligible.
fn radial_cutoff(disp: &Dispersion, beta: f64, dim: usize) -> f64 {
    // e^{-beta F} k^{d-1} below 1e-20 of the bulk.
    let mut target = 50.0;
    loop {
        let k = disp.radius_where_excess_reaches(beta, target);
        let log_tail = -target + (dim as f64 - 1.0) * k.max(1.0).ln();
        if log_tail < -46.0 || !k.is_finite() {
            return k;
        }
        target += 10.0;
    }
}

/// `int_{R^dim} dk / (y e^{beta F(|k|)} - 1)` (no prefactors).
pub fn bose_integral(disp: &Dispersion, dim: usize, beta: f64, u: FugacityExcess) -> Result<f64> {
    if dim == 0 {
        return Ok(bose_factor(u, 0.0));
    }
    if u.0 < 0.0 {
        return Err(Error::domain(format!("fugacity below 1 (y - 1 = {})", u.0)));
    }
    let p = disp.profile.small_k_exponent();
    if u.0 == 0.0 && !(dim as f64 > p) {
        return Err(Error::InfraredDivergence(format!(
            "Bose integral at y = 1 diverges: dimension {dim} does not exceed the small-k exponent {p}"
        )));
    }
    let k_max = radial_cutoff(disp, beta, dim);
    if !k_max.is_finite() {
        return Err(Error::InfraredDivergence("dispersion does not grow; Bose integral diverges".into()));
    }
    let d1 = dim as f64 - 1.0;
    let integrand = |k: f64| {
        if k == 0.0 {
            return if u.0 > 0.0 && dim == 1 { bose_factor(u, 0.0) } else { 0.0 };
        }
        k.powf(d1) * bose_factor(u, beta * disp.excess(k))
    };
    // Thermal scale separates the singular core from the exponential tail.
    let k_th = disp.radius_where_excess_reaches(beta, 1.0).min(k_max);
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 20000 };
    let core = integrate_from_zero_smoothed(integrand, k_th, 4, tol)?;
    let tail = integrate(integrand, k_th, k_max, tol)?;
    Ok(unit_sphere_area(dim) * (core.value + tail.value))
}

/// `rho_fr(beta, y) = N_i (2 pi)^{-d} int dk / (y e^{beta F} - 1)`.
pub fn rho_fr(disp: &Dispersion, beta: f64, u: FugacityExcess) -> Result<f64> {
    disp.check()?;
    if !(beta > 0.0) {
        return Err(Error::domain(format!("inverse temperature must be positive, got {beta}")));
    }
    let d = disp.dim;
    Ok(disp.components() * bose_integral(disp, d, beta, u)? / (2.0 * std::f64::consts::PI).powi(d as i32))
}

/// Critical density: `rho_fr` at `y = 1`.
pub fn rho_crit(disp: &Dispersion, beta: f64) -> Result<f64> {
    rho_fr(disp, beta, FugacityExcess(0.0))
}

/// Upper bound for the axial part of the density (`d >= 2`):
/// `d N_i / ((2 pi)^{d-1} L) (d int_{R^{d-1}} dk / (y e^{beta F} - 1) + eps)`.
pub fn axial_density_bound(disp: &Dispersion, beta: f64, u: FugacityExcess, box_size: f64, eps: f64) -> Result<f64> {
    let d = disp.dim;
    if d < 2 {
        return Ok(0.0);
    }
    let lower = bose_integral(disp, d - 1, beta, u)?;
    let df = d as f64;
    Ok(df * disp.components() / ((2.0 * std::f64::consts::PI).powi(d as i32 - 1) * box_size)
        * (df * lower + eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn free_quadratic() -> Dispersion {
        Dispersion::default_massive()
    }

    /// `zeta(3/2)` by Euler–Maclaurin on the tail.
    pub(crate) fn zeta_three_halves() -> f64 {
        let n = 1000usize;
        let head: f64 = (1..n).map(|k| (k as f64).powf(-1.5)).sum();
        let nf = n as f64;
        head + 2.0 / nf.sqrt() + 0.5 * nf.powf(-1.5) + 1.5 / 12.0 * nf.powf(-2.5)
            - 1.5 * 2.5 * 3.5 / 720.0 * nf.powf(-4.5)
    }

    #[test]
    fn zeta_oracle_value() {
        assert!((zeta_three_halves() - 2.612_375_348_685_488).abs() < 1e-12);
    }

    #[test]
    fn critical_density_matches_zeta_series() {
        let rc = rho_crit(&free_quadratic(), 1.0).unwrap();
        let oracle = PI.sqrt() * zeta_three_halves() / (8.0 * PI * PI);
        assert!((rc / oracle - 1.0).abs() < 1e-10, "{rc} vs {oracle}");
    }

    #[test]
    fn density_series_at_fugacity_above_one() {
        // (2 pi)^{-3} int dk / (y e^{k^2} - 1) = (4 pi)^{-3/2} sum_n y^{-n} n^{-3/2}
        let y: f64 = 1.7;
        let series: f64 = (1..400).map(|n| y.powi(-(n as i32)) * (n as f64).powf(-1.5)).sum();
        let want = series / (4.0 * PI).powf(1.5);
        let got = rho_fr(&free_quadratic(), 1.0, FugacityExcess::from_fugacity(y)).unwrap();
        assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn density_is_decreasing_and_vanishes() {
        let disp = free_quadratic();
        let r15 = rho_fr(&disp, 1.0, FugacityExcess(0.5)).unwrap();
        let r20 = rho_fr(&disp, 1.0, FugacityExcess(1.0)).unwrap();
        let rc = rho_crit(&disp, 1.0).unwrap();
        assert!(rc > r15 && r15 > r20);
        let far = rho_fr(&disp, 1.0, FugacityExcess(1e6)).unwrap();
        assert!(far < 1e-4 * rc);
    }

    #[test]
    fn components_scale_density() {
        let one = rho_crit(&free_quadratic(), 1.0).unwrap();
        let two = rho_crit(&Dispersion { internal_components: 2, ..free_quadratic() }, 1.0).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-15);
    }

    #[test]
    fn two_dimensions_diverge_at_unit_fugacity() {
        let disp = Dispersion { dim: 2, growth_exponent: 3.0, ..free_quadratic() };
        assert!(matches!(rho_crit(&disp, 1.0), Err(Error::InfraredDivergence(_))));
        // but is finite above 1: -ln(1 - 1/y) / (4 pi)
        let y: f64 = 3.0;
        let got = rho_fr(&disp, 1.0, FugacityExcess::from_fugacity(y)).unwrap();
        assert!((got + (1.0 - 1.0 / y).ln() / (4.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn single_mode_bose_factor() {
        // beta = 1, F = 1, y = e: 1 / (e^2 - 1)
        let v = bose_factor(FugacityExcess::from_fugacity(std::f64::consts::E), 1.0);
        assert!((v - 0.156_517_642_749_665_5).abs() < 1e-15);
    }

    #[test]
    fn tiny_box_keeps_only_zero_mode_weight() {
        let disp = free_quadratic();
        // L = 0.05 puts the first nonzero mode at beta F ~ 1.6e4.
        let modes = LatticeModes::new(&disp, 0.05, 1.0).unwrap();
        let n = boson_number_finite(&modes, &disp, FugacityExcess(0.25), 0.3).unwrap();
        assert!(n.nonzero < 1e-300);
        assert!((n.total - (4.0 + 0.3)).abs() < 1e-14);
    }

    #[test]
    fn rejects_condensed_pole() {
        let disp = free_quadratic();
        let modes = LatticeModes::new(&disp, 5.0, 1.0).unwrap();
        assert!(boson_number_finite(&modes, &disp, FugacityExcess(0.0), 0.0).is_err());
    }
}
