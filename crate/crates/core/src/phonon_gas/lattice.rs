//! Momentum lattice `(2 pi / L) Z^d` of a periodic box, grouped into shells
//! of equal `|n|^2` so that radial sums cost one evaluation per shell.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dispersion::Dispersion;
use crate::error::{Error, Result};

/// Relative Boltzmann-factor threshold (against the smallest nonzero mode)
/// below which modes are dropped.
pub const TRUNCATION_EPS: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shell {
    /// `|n|^2` for integer lattice vectors `n`.
    pub norm_sq: u64,
    /// Number of `n` on the shell with every coordinate nonzero.
    pub all_nonzero: u64,
    /// Number of `n != 0` on the shell with at least one zero coordinate.
    pub some_zero: u64,
}

impl Shell {
    pub fn count(&self) -> u64 {
        self.all_nonzero + self.some_zero
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeModes {
    pub box_size: f64,
    pub dim: usize,
    /// Nonzero shells in increasing `|n|^2`; the zero mode is implicit.
    pub shells: Vec<Shell>,
    /// Integer radius `R`: every `n` with `|n| <= R` is retained.
    pub radius: f64,
    /// Upper bound on `sum e^{-beta F(k)}` over the excluded modes.
    pub tail_bound: f64,
    /// `sum e^{-beta F(k)}` over the retained modes, including `k = 0`.
    pub included_weight: f64,
    pub beta: f64,
}

impl LatticeModes {
    /// Retains every mode with `e^{-beta F(k)} >= 1e-16 e^{-beta F(2 pi / L)}`,
    /// tightening the threshold if the tail bound is not yet below `1e-12` of
    /// the retained weight.
    pub fn new(disp: &Dispersion, box_size: f64, beta: f64) -> Result<Self> {
        let mut eps = TRUNCATION_EPS;
        loop {
            let modes = Self::with_threshold(disp, box_size, beta, eps)?;
            if modes.truncation_certified() || eps < 1e-60 {
                return Ok(modes);
            }
            eps *= 1e-4;
        }
    }

    pub fn with_threshold(disp: &Dispersion, box_size: f64, beta: f64, eps: f64) -> Result<Self> {
        disp.check()?;
        if !(box_size > 0.0) || !box_size.is_finite() {
            return Err(Error::domain(format!("box size must be positive, got {box_size}")));
        }
        if !(beta > 0.0) {
            return Err(Error::domain(format!("inverse temperature must be positive, got {beta}")));
        }
        let h = spacing(box_size);
        let target = beta * disp.excess(h) - eps.ln();
        let k_max = disp.radius_where_excess_reaches(beta, target);
        if !k_max.is_finite() {
            return Err(Error::domain("dispersion does not grow; mode sum cannot be truncated"));
        }
        let radius = (k_max / h).max(1.0);
        let shells = enumerate_shells(disp.dim, radius)?;
        let weight = |ns: u64| (-beta * disp.excess(h * (ns as f64).sqrt())).exp();
        let included_weight = 1.0 + shells.iter().map(|s| s.count() as f64 * weight(s.norm_sq)).sum::<f64>();
        let tail_bound = tail_bound(disp, beta, h, radius);
        Ok(Self { box_size, dim: disp.dim, shells, radius, tail_bound, included_weight, beta })
    }

    pub fn spacing(&self) -> f64 {
        spacing(self.box_size)
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.box_size.powi(self.dim as i32)
    }

    /// `|k|` on a shell.
    pub fn shell_momentum(&self, shell: &Shell) -> f64 {
        self.spacing() * (shell.norm_sq as f64).sqrt()
    }

    pub fn num_modes(&self) -> u64 {
        1 + self.shells.iter().map(Shell::count).sum::<u64>()
    }

    /// Whether the excluded tail is below `1e-12` of the retained weight.
    pub fn truncation_certified(&self) -> bool {
        self.tail_bound < 1e-12 * self.included_weight
    }

    /// `sum_{k != 0} g(|k|)`, split into (all coordinates nonzero, some zero).
    /// Shells are visited in increasing order, so the result is reproducible.
    pub fn radial_sum_split(&self, g: impl Fn(f64) -> f64) -> (f64, f64) {
        let mut interior = 0.0;
        let mut axial = 0.0;
        for s in &self.shells {
            let v = g(self.shell_momentum(s));
            interior += s.all_nonzero as f64 * v;
            axial += s.some_zero as f64 * v;
        }
        (interior, axial)
    }

    pub fn radial_sum(&self, g: impl Fn(f64) -> f64) -> f64 {
        let (a, b) = self.radial_sum_split(g);
        a + b
    }
}

pub fn spacing(box_size: f64) -> f64 {
    2.0 * std::f64::consts::PI / box_size
}

/// Histogram of `|n|^2` over `n in Z^d \ {0}` with `|n| <= radius`, built from
/// the nonnegative orthant with sign multiplicities.
fn enumerate_shells(dim: usize, radius: f64) -> Result<Vec<Shell>> {
    if dim > 6 {
        return Err(Error::domain(format!("lattice sums support d <= 6, got {dim}")));
    }
    let m = radius.floor() as i64;
    let r2 = (radius * radius).floor() as u64;
    let orthant_points = ((m + 1) as f64).powi(dim as i32);
    if orthant_points > 5e8 {
        return Err(Error::domain(format!("lattice with {orthant_points:.3e} orthant points is too large")));
    }
    let mut hist: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    let mut n = vec![0i64; dim];
    loop {
        let ns: u64 = n.iter().map(|&x| (x * x) as u64).sum();
        if ns > 0 && ns <= r2 {
            let zeros = n.iter().filter(|&&x| x == 0).count();
            let mult = 1u64 << (dim - zeros);
            let entry = hist.entry(ns).or_default();
            if zeros == 0 {
                entry.0 += mult;
            } else {
                entry.1 += mult;
            }
        }
        // Odometer increment with early exit when the partial norm exceeds r2.
        let mut i = dim;
        loop {
            if i == 0 {
                return Ok(hist
                    .into_iter()
                    .map(|(norm_sq, (a, b))| Shell { norm_sq, all_nonzero: a, some_zero: b })
                    .collect());
            }
            i -= 1;
            n[i] += 1;
            let partial: u64 = n[..=i].iter().map(|&x| (x * x) as u64).sum();
            if n[i] <= m && partial <= r2 {
                break;
            }
            n[i] = 0;
        }
    }
}

/// `sum_{j >= floor(R)} (2j + 3)^d g(h j)` with `g = e^{-beta F}`: each unit
/// shell `j <= |n| < j + 1` holds at most `(2j + 3)^d` points and `g` is
/// decreasing.
fn tail_bound(disp: &Dispersion, beta: f64, h: f64, radius: f64) -> f64 {
    let d = disp.dim as i32;
    let mut j = radius.floor();
    let mut total = 0.0;
    loop {
        let term = (2.0 * j + 3.0).powi(d) * (-beta * disp.excess(h * j)).exp();
        total += term;
        if term < 1e-30 * total.max(f64::MIN_POSITIVE) || term == 0.0 || j > radius + 1e7 {
            break;
        }
        j += 1.0;
    }
    total
}

/// Integer lattice vectors `n` with `lo <= h n <= hi` componentwise.
pub fn lattice_points_in_box(h: f64, lo: &[f64], hi: &[f64]) -> Vec<Vec<i64>> {
    let dim = lo.len();
    let ranges: Vec<(i64, i64)> = lo
        .iter()
        .zip(hi)
        .map(|(&a, &b)| ((a / h).ceil() as i64, (b / h).floor() as i64))
        .collect();
    if ranges.iter().any(|&(a, b)| a > b) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut n: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(n.clone());
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            n[i] += 1;
            if n[i] <= ranges[i].1 {
                break;
            }
            n[i] = ranges[i].0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_shells(dim: usize, radius: f64) -> BTreeMap<u64, (u64, u64)> {
        let m = radius.floor() as i64;
        let mut hist = BTreeMap::new();
        let pts = lattice_points_in_box(1.0, &vec![-m as f64; dim], &vec![m as f64; dim]);
        for n in pts {
            let ns: u64 = n.iter().map(|&x| (x * x) as u64).sum();
            if ns == 0 || ns as f64 > radius * radius {
                continue;
            }
            let e: &mut (u64, u64) = hist.entry(ns).or_default();
            if n.iter().all(|&x| x != 0) {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
        hist
    }

    #[test]
    fn shells_match_brute_force() {
        for dim in 1..=3 {
            let shells = enumerate_shells(dim, 6.3).unwrap();
            let brute = brute_shells(dim, 6.3);
            assert_eq!(shells.len(), brute.len());
            for s in shells {
                assert_eq!(brute[&s.norm_sq], (s.all_nonzero, s.some_zero), "dim {dim}");
            }
        }
    }

    #[test]
    fn one_dimension_has_no_axial_modes() {
        let disp = Dispersion { dim: 1, growth_exponent: 2.0, ..Dispersion::default_massive() };
        let modes = LatticeModes::new(&disp, 10.0, 1.0).unwrap();
        assert!(modes.shells.iter().all(|s| s.some_zero == 0));
    }

    #[test]
    fn truncation_is_certified_across_sizes() {
        let disp = Dispersion::default_massive();
        for &l in &[2.0, 10.0, 40.0] {
            let modes = LatticeModes::new(&disp, l, 1.0).unwrap();
            assert!(modes.truncation_certified(), "L = {l}: tail {} vs {}", modes.tail_bound, modes.included_weight);
        }
    }

    #[test]
    fn gaussian_lattice_sum_matches_jacobi_theta() {
        // sum_{n in Z} e^{-a n^2} = sqrt(pi/a) sum_m e^{-pi^2 m^2 / a}
        let disp = Dispersion { dim: 1, growth_exponent: 2.0, ..Dispersion::default_massive() };
        let l = 7.0;
        let modes = LatticeModes::new(&disp, l, 1.0).unwrap();
        let h = modes.spacing();
        let a = h * h;
        let lattice = 1.0 + modes.radial_sum(|k| (-k * k).exp());
        let dual: f64 = (-5i32..=5).map(|m| (-(std::f64::consts::PI.powi(2)) * (m * m) as f64 / a).exp()).sum();
        assert!((lattice - (std::f64::consts::PI / a).sqrt() * dual).abs() < 1e-12);
    }
}
