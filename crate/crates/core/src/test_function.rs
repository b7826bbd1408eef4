//! Momentum-space test functions `f: R^d -> C^{N_i}` built from Gaussian bumps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phonon_gas::Dispersion;
use crate::quadrature::{integrate, integrate_ball, integrate_from_zero_smoothed, Tolerance};

/// `amplitude * exp(-|k - center|^2 / (2 width^2))` in one internal component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub width: f64,
    pub amplitude: Complex64,
    pub component: usize,
}

impl GaussianBump {
    pub fn value(&self, k: &[f64]) -> Complex64 {
        let r2: f64 = k.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        self.amplitude * (-0.5 * r2 / (self.width * self.width)).exp()
    }
}

/// Anything that can be sampled pointwise in momentum space.
pub trait MomentumProfile: Sync {
    fn dim(&self) -> usize;
    fn components(&self) -> usize;
    /// `f_c(k)`.
    fn component_value(&self, component: usize, k: &[f64]) -> Complex64;
    /// Axis-aligned box outside which `|f|^2` is below about `1e-21` of its peak.
    fn support_box(&self) -> (Vec<f64>, Vec<f64>);
    /// Angular resolution needed at radius `k` for integrands built from `|f|^2`.
    fn angular_order(&self, k: f64) -> usize;

    /// A Gaussian test function with the same pointwise modulus, if any;
    /// enables closed-form angular integration of `|f|^2`.
    fn gaussian_modulus(&self) -> Option<&TestFunction> {
        None
    }

    /// The profile itself as a Gaussian test function, if it is one.
    fn as_gaussian(&self) -> Option<&TestFunction> {
        None
    }

    /// `|f(k)|^2 = sum_c |f_c(k)|^2`.
    fn norm_sq_at(&self, k: &[f64]) -> f64 {
        (0..self.components()).map(|c| self.component_value(c, k).norm_sqr()).sum()
    }

    /// Radius of the smallest origin-centred ball containing the support box.
    fn support_radius(&self) -> f64 {
        let (lo, hi) = self.support_box();
        lo.iter().zip(&hi).map(|(a, b)| a.abs().max(b.abs()).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub dim: usize,
    pub components: usize,
    pub bumps: Vec<GaussianBump>,
}

impl TestFunction {
    pub fn new(dim: usize, components: usize, bumps: Vec<GaussianBump>) -> Result<Self> {
        if dim == 0 || components == 0 {
            return Err(Error::domain("test function needs positive dimension and component count"));
        }
        for b in &bumps {
            if b.center.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: b.center.len() });
            }
            if !(b.width > 0.0) {
                return Err(Error::domain(format!("bump width must be positive, got {}", b.width)));
            }
            if b.component >= components {
                return Err(Error::domain(format!("component {} out of range 0..{components}", b.component)));
            }
        }
        Ok(Self { dim, components, bumps })
    }

    pub fn zero(dim: usize, components: usize) -> Self {
        Self { dim, components, bumps: Vec::new() }
    }

    /// Single scalar bump.
    pub fn gaussian(center: Vec<f64>, width: f64, amplitude: Complex64) -> Result<Self> {
        let dim = center.len();
        Self::new(dim, 1, vec![GaussianBump { center, width, amplitude, component: 0 }])
    }

    pub fn is_zero(&self) -> bool {
        self.bumps.iter().all(|b| b.amplitude == Complex64::new(0.0, 0.0))
    }

    /// `z f`.
    pub fn scaled(&self, z: Complex64) -> Self {
        let bumps = self
            .bumps
            .iter()
            .map(|b| GaussianBump { amplitude: b.amplitude * z, ..b.clone() })
            .collect();
        Self { bumps, ..self.clone() }
    }

    /// `f + g` (same dimension and component count).
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.components != other.components {
            return Err(Error::domain("test functions live on different spaces"));
        }
        let mut bumps = self.bumps.clone();
        bumps.extend(other.bumps.iter().cloned());
        Ok(Self { bumps, ..self.clone() })
    }

    /// `(2 pi)^{-d/2} int f_c(k) dk` for every component.
    pub fn zero_mode(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.components];
        for b in &self.bumps {
            out[b.component] += b.amplitude * b.width.powi(self.dim as i32);
        }
        out
    }

    /// `|f^(0)|^2` summed over components.
    pub fn zero_mode_norm_sq(&self) -> f64 {
        self.zero_mode().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Zero mode as a single complex number; only defined when at most one
    /// component carries a nonzero zero mode.
    pub fn zero_mode_scalar(&self) -> Result<Complex64> {
        let zm = self.zero_mode();
        let nonzero: Vec<&Complex64> = zm.iter().filter(|z| z.norm() > 0.0).collect();
        match nonzero.len() {
            0 => Ok(Complex64::new(0.0, 0.0)),
            1 => Ok(*nonzero[0]),
            _ => Err(Error::domain("zero mode is spread over several internal components")),
        }
    }

    /// `<f, g> = sum_c int conj(f_c) g_c dk`, in closed form.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let d = self.dim as i32;
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.bumps {
            for b in &other.bumps {
                if a.component != b.component {
                    continue;
                }
                let (s1, s2) = (a.width * a.width, b.width * b.width);
                let dist2: f64 = a.center.iter().zip(&b.center).map(|(x, y)| (x - y) * (x - y)).sum();
                let prefactor = (2.0 * std::f64::consts::PI * s1 * s2 / (s1 + s2)).powf(d as f64 / 2.0);
                acc += a.amplitude.conj() * b.amplitude * prefactor * (-0.5 * dist2 / (s1 + s2)).exp();
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).re
    }

    /// `e^{i t omega(k)} f(k)`.
    pub fn evolved<'a>(&'a self, t: f64, disp: &'a Dispersion) -> Evolved<'a> {
        Evolved { base: self, time: t, disp }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: self.dim });
        }
        Ok(())
    }
}

/// Number of standard deviations of `|f|^2` kept by `support_box`.
const SUPPORT_SIGMAS: f64 = 7.0;

impl MomentumProfile for TestFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn gaussian_modulus(&self) -> Option<&TestFunction> {
        Some(self)
    }

    fn as_gaussian(&self) -> Option<&TestFunction> {
        Some(self)
    }

    fn components(&self) -> usize {
        self.components
    }

    fn component_value(&self, component: usize, k: &[f64]) -> Complex64 {
        self.bumps
            .iter()
            .filter(|b| b.component == component)
            .map(|b| b.value(k))
            .sum()
    }

    fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        if self.bumps.is_empty() {
            return (vec![0.0; self.dim], vec![0.0; self.dim]);
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for b in &self.bumps {
            // |bump|^2 = |A|^2 e^{-r^2 / w^2}: 7 widths gives e^{-49}.
            let reach = SUPPORT_SIGMAS * b.width * (1.0 + (b.amplitude.norm().max(1.0)).ln() / 49.0).sqrt();
            for i in 0..self.dim {
                lo[i] = lo[i].min(b.center[i] - reach);
                hi[i] = hi[i].max(b.center[i] + reach);
            }
        }
        (lo, hi)
    }

    fn angular_order(&self, k: f64) -> usize {
        // |f|^2 restricted to the sphere of radius k peaks like exp(a cos gamma)
        // with a = 2 k |center| / width^2 (and cross terms of similar size).
        let sharp = self
            .bumps
            .iter()
            .map(|b| {
                let c: f64 = b.center.iter().map(|x| x * x).sum::<f64>().sqrt();
                2.0 * k * c / (b.width * b.width) + k / b.width
            })
            .fold(0.0, f64::max);
        ((16.0 * sharp).sqrt() as usize + 12).min(600)
    }
}

/// `e^{i t omega} f` for a base test function.
#[derive(Debug, Clone, Copy)]
pub struct Evolved<'a> {
    pub base: &'a TestFunction,
    pub time: f64,
    pub disp: &'a Dispersion,
}

impl Evolved<'_> {
    /// `(2 pi)^{-d/2} int e^{i t omega(k)} f_c(k) dk` by quadrature.
    pub fn zero_mode(&self, tol: Tolerance) -> Result<Vec<Complex64>> {
        let d = self.base.dim;
        let norm = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
        let r = self.support_radius();
        (0..self.base.components)
            .map(|c| {
                let res = integrate_ball(
                    d,
                    0.0,
                    r,
                    |k: &[f64]| self.component_value(c, k),
                    |k| self.angular_order(k),
                    1,
                    tol,
                )?;
                Ok(res.value * norm)
            })
            .collect()
    }

    pub fn zero_mode_norm_sq(&self, tol: Tolerance) -> Result<f64> {
        Ok(self.zero_mode(tol)?.iter().map(|z| z.norm_sqr()).sum())
    }
}

impl MomentumProfile for Evolved<'_> {
    fn dim(&self) -> usize {
        self.base.dim
    }

    /// `|e^{i t omega} f| = |f|`.
    fn gaussian_modulus(&self) -> Option<&TestFunction> {
        Some(self.base)
    }

    fn components(&self) -> usize {
        self.base.components
    }

    fn component_value(&self, component: usize, k: &[f64]) -> Complex64 {
        let phase = Complex64::from_polar(1.0, self.time * self.disp.omega_at(k));
        phase * self.base.component_value(component, k)
    }

    fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        self.base.support_box()
    }

    fn angular_order(&self, k: f64) -> usize {
        self.base.angular_order(k)
    }
}

/// `int_{S^{d-1}} conj(g(k w)) f(k w) dw` for Gaussian test functions, in
/// closed form for `d = 1, 3` and by an exponentially convergent trapezoid
/// rule on the circle for `d = 2`.
pub fn sphere_pair_integral(g: &TestFunction, f: &TestFunction, k: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in &g.bumps {
        for b in &f.bumps {
            if a.component != b.component {
                continue;
            }
            let (pa, pb) = (1.0 / (a.width * a.width), 1.0 / (b.width * b.width));
            let v: Vec<f64> = a.center.iter().zip(&b.center).map(|(x, y)| x * pa + y * pb).collect();
            let ca: f64 = a.center.iter().map(|x| x * x).sum();
            let cb: f64 = b.center.iter().map(|x| x * x).sum();
            let base = -0.5 * (pa + pb) * k * k - 0.5 * (ca * pa + cb * pb);
            let z = k * v.iter().map(|x| x * x).sum::<f64>().sqrt();
            // Angular integral of e^{k v . w}, scaled by e^{-z}.
            let scaled = match g.dim {
                1 => 1.0 + (-2.0 * z).exp(),
                2 => {
                    let n = (z as usize) + 48;
                    2.0 * std::f64::consts::PI * crate::quadrature::periodic_mean(n, |t: f64| (z * (t.cos() - 1.0)).exp())
                }
                _ => {
                    let shape = if z < 1e-8 { 1.0 } else { -(-2.0 * z).exp_m1() / (2.0 * z) };
                    4.0 * std::f64::consts::PI * shape
                }
            };
            acc += a.amplitude.conj() * b.amplitude * ((base + z).exp() * scaled);
        }
    }
    acc
}

fn integrate_radial(radial: impl Fn(f64) -> f64, r: f64, smoothing: u32, tol: Tolerance) -> Result<f64> {
    let res = if smoothing > 1 {
        integrate_from_zero_smoothed(radial, r, smoothing, tol)?
    } else {
        integrate(radial, 0.0, r, tol)?
    };
    Ok(res.value)
}

/// `int |f(k)|^2 w(F(k)) dk` over `R^d` (`d <= 3`). Gaussian profiles reduce
/// to a radial integral with closed-form angular factors; anything else goes
/// through [`weighted_norm_sq_cubature`].
pub fn weighted_norm_sq(
    f: &dyn MomentumProfile,
    weight: impl Fn(f64) -> f64,
    excess: impl Fn(f64) -> f64,
    smoothing: u32,
    tol: Tolerance,
) -> Result<f64> {
    let Some(tf) = f.gaussian_modulus() else {
        return weighted_norm_sq_cubature(f, weight, excess, smoothing, tol);
    };
    let r = f.support_radius();
    if r == 0.0 || !(1..=3).contains(&f.dim()) {
        return if r == 0.0 { Ok(0.0) } else { weighted_norm_sq_cubature(f, weight, excess, smoothing, tol) };
    }
    let d = f.dim() as i32;
    integrate_radial(
        |k| {
            if k <= 0.0 && d > 1 {
                return 0.0;
            }
            let w = weight(excess(k));
            if w == 0.0 {
                return 0.0;
            }
            sphere_pair_integral(tf, tf, k).re * k.powi(d - 1) * w
        },
        r,
        smoothing,
        tol,
    )
}

/// [`weighted_norm_sq`] by full radial-times-angular cubature.
pub fn weighted_norm_sq_cubature(
    f: &dyn MomentumProfile,
    weight: impl Fn(f64) -> f64,
    excess: impl Fn(f64) -> f64,
    smoothing: u32,
    tol: Tolerance,
) -> Result<f64> {
    let r = f.support_radius();
    if r == 0.0 {
        return Ok(0.0);
    }
    let res = integrate_ball(
        f.dim(),
        0.0,
        r,
        |k: &[f64]| {
            let kk = crate::phonon_gas::momentum_norm(k);
            let w = weight(excess(kk));
            if w == 0.0 {
                return 0.0;
            }
            f.norm_sq_at(k) * w
        },
        |k| f.angular_order(k),
        smoothing,
        tol,
    )?;
    Ok(res.value)
}

/// `int conj(g(k)) f(k) w(F(k)) dk`, radial with closed-form angular factors
/// when both sides are Gaussian test functions.
pub fn weighted_inner(
    g: &dyn MomentumProfile,
    f: &dyn MomentumProfile,
    weight: impl Fn(f64) -> f64,
    excess: impl Fn(f64) -> f64,
    smoothing: u32,
    tol: Tolerance,
) -> Result<Complex64> {
    if g.dim() != f.dim() || g.components() != f.components() {
        return Err(Error::domain("test functions live on different spaces"));
    }
    let r = g.support_radius().min(f.support_radius());
    if r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let r_hi = g.support_radius().max(f.support_radius());
    if let (Some(gg), Some(ff)) = (g.as_gaussian(), f.as_gaussian()) {
        if (1..=3).contains(&f.dim()) {
            let d = f.dim() as i32;
            let part = |pick: fn(Complex64) -> f64| {
                integrate_radial(
                    |k| {
                        if k <= 0.0 && d > 1 {
                            return 0.0;
                        }
                        let w = weight(excess(k));
                        if w == 0.0 {
                            return 0.0;
                        }
                        pick(sphere_pair_integral(gg, ff, k)) * k.powi(d - 1) * w
                    },
                    r_hi,
                    smoothing,
                    tol,
                )
            };
            return Ok(Complex64::new(part(|z| z.re)?, part(|z| z.im)?));
        }
    }
    weighted_inner_cubature(g, f, weight, excess, smoothing, tol)
}

/// [`weighted_inner`] by full radial-times-angular cubature.
pub fn weighted_inner_cubature(
    g: &dyn MomentumProfile,
    f: &dyn MomentumProfile,
    weight: impl Fn(f64) -> f64,
    excess: impl Fn(f64) -> f64,
    smoothing: u32,
    tol: Tolerance,
) -> Result<Complex64> {
    if g.dim() != f.dim() || g.components() != f.components() {
        return Err(Error::domain("test functions live on different spaces"));
    }
    if g.support_radius().min(f.support_radius()) == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let res = integrate_ball(
        f.dim(),
        0.0,
        g.support_radius().max(f.support_radius()),
        |k: &[f64]| {
            let kk = crate::phonon_gas::momentum_norm(k);
            let w = weight(excess(kk));
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..f.components() {
                acc += g.component_value(c, k).conj() * f.component_value(c, k);
            }
            acc * w
        },
        |k| f.angular_order(k).max(g.angular_order(k)),
        smoothing,
        tol,
    )?;
    Ok(res.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump3() -> TestFunction {
        TestFunction::new(
            3,
            1,
            vec![
                GaussianBump { center: vec![1.5, 0.0, 0.0], width: 0.4, amplitude: Complex64::new(1.0, 0.0), component: 0 },
                GaussianBump { center: vec![0.0, -0.7, 0.5], width: 0.6, amplitude: Complex64::new(0.3, -0.8), component: 0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn closed_form_norm_matches_quadrature() {
        let f = bump3();
        let quad = weighted_norm_sq(&f, |_| 1.0, |k| k * k, 1, Tolerance::new(1e-13, 1e-11)).unwrap();
        assert!((quad / f.norm_sq() - 1.0).abs() < 1e-9, "{quad} vs {}", f.norm_sq());
    }

    #[test]
    fn radial_reduction_matches_cubature() {
        let f = bump3();
        let g = f.scaled(Complex64::new(0.2, 0.9)).sum(&TestFunction::gaussian(vec![0.4, 0.4, -0.2], 0.3, Complex64::new(0.5, 0.0)).unwrap()).unwrap();
        let tol = Tolerance::new(1e-14, 1e-12);
        let w = |x: f64| 1.0 + 2.0 / x.exp_m1();
        let fast = weighted_norm_sq(&f, w, |k| k * k, 2, tol).unwrap();
        let slow = weighted_norm_sq_cubature(&f, w, |k| k * k, 2, tol).unwrap();
        assert!((fast - slow).abs() < 1e-10 * slow, "{fast} vs {slow}");
        let fast = weighted_inner(&g, &f, w, |k| k * k, 2, tol).unwrap();
        let slow = weighted_inner_cubature(&g, &f, w, |k| k * k, 2, tol).unwrap();
        assert!((fast - slow).norm() < 1e-10 * slow.norm(), "{fast} vs {slow}");
    }

    #[test]
    fn planar_and_linear_reductions() {
        let tol = Tolerance::new(1e-14, 1e-12);
        for f in [
            TestFunction::gaussian(vec![0.7, -0.3], 0.4, Complex64::new(1.0, 0.5)).unwrap(),
            TestFunction::gaussian(vec![0.7], 0.4, Complex64::new(1.0, 0.5)).unwrap(),
        ] {
            let fast = weighted_norm_sq(&f, |x| 1.0 / (1.0 + x), |k| k, 1, tol).unwrap();
            let slow = weighted_norm_sq_cubature(&f, |x| 1.0 / (1.0 + x), |k| k, 1, tol).unwrap();
            assert!((fast - slow).abs() < 1e-10 * slow, "d = {}: {fast} vs {slow}", f.dim);
        }
    }

    #[test]
    fn zero_mode_closed_form_matches_quadrature() {
        let f = bump3();
        let disp = Dispersion::default_massive();
        let frozen = f.evolved(0.0, &disp).zero_mode(Tolerance::new(1e-13, 1e-11)).unwrap();
        assert!((frozen[0] - f.zero_mode()[0]).norm() < 1e-9);
    }

    #[test]
    fn scaling_and_phase() {
        let f = bump3();
        let g = f.scaled(Complex64::from_polar(2.0, 0.3));
        assert!((g.norm_sq() - 4.0 * f.norm_sq()).abs() < 1e-12);
        assert!((g.zero_mode()[0] - Complex64::from_polar(2.0, 0.3) * f.zero_mode()[0]).norm() < 1e-14);
    }

    #[test]
    fn one_dimensional_bump_norm() {
        let f = TestFunction::gaussian(vec![0.3], 0.5, Complex64::new(2.0, 0.0)).unwrap();
        // int 4 e^{-(k - 0.3)^2 / 0.25} dk = 4 sqrt(0.25 pi)
        assert!((f.norm_sq() - 4.0 * (0.25 * std::f64::consts::PI).sqrt()).abs() < 1e-13);
        assert!((f.zero_mode()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_component() {
        let b = GaussianBump { center: vec![0.0], width: 1.0, amplitude: Complex64::new(1.0, 0.0), component: 1 };
        assert!(TestFunction::new(1, 1, vec![b]).is_err());
    }
}
