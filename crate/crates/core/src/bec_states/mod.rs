//! Infinite-volume characteristic functionals of the free phonon gas: the
//! gauge-invariant condensed state, its gauge-breaking fibers labelled by
//! `(r, theta)`, and the measure `chi` that mixes them back together.

mod fingerprint;
mod identities;
mod limits;

pub use fingerprint::{
    fingerprint_probes, fingerprint_recover, gauge_shift_check, injectivity_rank, InjectivityReport, RecoveredPhase,
};
pub use identities::{angular_identity_check, bessel_identity_check, IdentityGap};
pub use limits::{
    characteristic_limits, combined_limit_ladder, CharacteristicLimitPoint, CombinedPoint, CombinedReport, ElectronFactor,
};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phonon_gas::{rho_crit, Dispersion};
use crate::quadrature::{gauss_laguerre, periodic_mean, QuadValue, Tolerance};
use crate::test_function::{weighted_inner, weighted_norm_sq, MomentumProfile, TestFunction};

/// Gauss–Laguerre nodes in `r` for averages over `chi`.
pub const CHI_RADIAL_NODES: usize = 64;
/// Trapezoid nodes in `theta` for averages over `chi`.
pub const CHI_ANGULAR_NODES: usize = 256;

/// A fiber label `(r, theta)` together with the condensate it lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensatePhase {
    pub r: f64,
    /// Normalized to `[0, 2 pi)`.
    pub theta: f64,
    /// `rho_{b,0}(beta) > 0`.
    pub condensate_density: f64,
    /// `c = 2 (2 pi)^d rho_{b,0} / N_i`.
    pub amplitude: f64,
}

impl CondensatePhase {
    pub fn new(r: f64, theta: f64, condensate_density: f64, disp: &Dispersion) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("fiber radius must be finite and nonnegative, got {r}")));
        }
        if !theta.is_finite() {
            return Err(Error::domain("fiber angle must be finite"));
        }
        let amplitude = condensate_amplitude(disp, condensate_density)?;
        Ok(Self { r, theta: theta.rem_euclid(2.0 * PI), condensate_density, amplitude })
    }

    /// Same fiber with `theta -> theta + shift`.
    pub fn rotated(&self, shift: f64) -> Self {
        Self { theta: (self.theta + shift).rem_euclid(2.0 * PI), ..*self }
    }

    pub fn with_label(&self, r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() || !theta.is_finite() {
            return Err(Error::domain(format!("invalid fiber label ({r}, {theta})")));
        }
        Ok(Self { r, theta: theta.rem_euclid(2.0 * PI), ..*self })
    }
}

/// `c = 2 (2 pi)^d rho_0 / N_i`, requiring `rho_0 > 0`.
pub fn condensate_amplitude(disp: &Dispersion, condensate_density: f64) -> Result<f64> {
    if !(condensate_density > 0.0) || !condensate_density.is_finite() {
        return Err(Error::domain(format!("condensate density must be positive, got {condensate_density}")));
    }
    Ok(2.0 * (2.0 * PI).powi(disp.dim as i32) * condensate_density / disp.components())
}

/// `(1 + e^{-x}) / (1 - e^{-x}) = coth(x / 2)`.
fn thermal_kernel(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    1.0 + 2.0 / x.exp_m1()
}

/// `(y + e^{-x}) / (y - e^{-x})` with `y = 1 + u`.
fn normal_kernel(u: f64, x: f64) -> f64 {
    // y - e^{-x} = u + (1 - e^{-x})
    let denom = u - (-x).exp_m1();
    1.0 + 2.0 * (-x).exp() / denom
}

/// `e^{-x} / (1 - e^{-x})`.
fn occupation_kernel(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    1.0 / x.exp_m1()
}

/// Quadratic forms of the free Gibbs and condensed states at inverse
/// temperature `beta`, with kernels in `F = omega - omega(0)`.
#[derive(Debug, Clone, Copy)]
pub struct FreeBosonForms<'a> {
    pub disp: &'a Dispersion,
    pub beta: f64,
    pub tol: Tolerance,
}

impl<'a> FreeBosonForms<'a> {
    pub fn new(disp: &'a Dispersion, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { disp, beta, tol: Tolerance::new(1e-14, 1e-12) })
    }

    fn check(&self, f: &dyn MomentumProfile) -> Result<()> {
        if f.dim() != self.disp.dim {
            return Err(Error::DimensionMismatch { expected: self.disp.dim, actual: f.dim() });
        }
        if f.components() != self.disp.internal_components {
            return Err(Error::DimensionMismatch { expected: self.disp.internal_components, actual: f.components() });
        }
        Ok(())
    }

    /// `q1` diverges when `F ~ k^p` with `p >= d` and `f(0) != 0`.
    fn check_infrared(&self, f: &dyn MomentumProfile) -> Result<()> {
        let p = self.disp.profile.small_k_exponent();
        let at_zero = f.norm_sq_at(&vec![0.0; f.dim()]);
        if p >= self.disp.dim as f64 && at_zero > 0.0 {
            return Err(Error::InfraredDivergence(format!(
                "q1 needs int |f|^2 / F near k = 0; F ~ k^{p} in d = {} with |f(0)|^2 = {at_zero:.3e}",
                self.disp.dim
            )));
        }
        Ok(())
    }

    /// `q0(f) = c |f^(0)|^2`.
    pub fn q0(&self, f: &TestFunction, condensate_density: f64) -> Result<f64> {
        self.check(f)?;
        if condensate_density == 0.0 {
            return Ok(0.0);
        }
        Ok(condensate_amplitude(self.disp, condensate_density)? * f.zero_mode_norm_sq())
    }

    /// `q1(f) = <f, (1 + e^{-beta F}) (1 - e^{-beta F})^{-1} f>`.
    pub fn q1(&self, f: &dyn MomentumProfile) -> Result<f64> {
        self.check(f)?;
        self.check_infrared(f)?;
        let beta = self.beta;
        weighted_norm_sq(f, |x| thermal_kernel(beta * x), |k| self.disp.excess(k), 2, self.tol)
    }

    /// Sesquilinear `q1(g, f) = int conj(g) (1 + e^{-beta F}) (1 - e^{-beta F})^{-1} f`.
    pub fn q1_polar(&self, g: &dyn MomentumProfile, f: &dyn MomentumProfile) -> Result<Complex64> {
        self.check(f)?;
        self.check(g)?;
        self.check_infrared(f)?;
        self.check_infrared(g)?;
        let beta = self.beta;
        weighted_inner(g, f, |x| thermal_kernel(beta * x), |k| self.disp.excess(k), 2, self.tol)
    }

    /// `<g, e^{-beta F} (1 - e^{-beta F})^{-1} f>`.
    pub fn occupation_form(&self, g: &dyn MomentumProfile, f: &dyn MomentumProfile) -> Result<Complex64> {
        self.check(f)?;
        self.check(g)?;
        self.check_infrared(f)?;
        self.check_infrared(g)?;
        let beta = self.beta;
        weighted_inner(g, f, |x| occupation_kernel(beta * x), |k| self.disp.excess(k), 2, self.tol)
    }

    /// `q2(f) = int |f|^2 (y + e^{-beta F}) / (y - e^{-beta F})` for `y >= 1`.
    pub fn q2(&self, f: &dyn MomentumProfile, y_infinity: f64) -> Result<f64> {
        if !(y_infinity >= 1.0) {
            return Err(Error::domain(format!("limit fugacity must be at least 1, got {y_infinity}")));
        }
        if y_infinity == 1.0 {
            return self.q1(f);
        }
        self.check(f)?;
        let (beta, u) = (self.beta, y_infinity - 1.0);
        weighted_norm_sq(f, |x| normal_kernel(u, beta * x), |k| self.disp.excess(k), 1, self.tol)
    }

    /// `psi_BEC(W(f)) = exp(-(q0 + q1) / 4)`.
    pub fn psi_bec(&self, f: &TestFunction, condensate_density: f64) -> Result<f64> {
        Ok((-0.25 * (self.q0(f, condensate_density)? + self.q1(f)?)).exp())
    }

    /// Normal-phase value `exp(-q2 / 4)`.
    pub fn psi_normal(&self, f: &TestFunction, y_infinity: f64) -> Result<f64> {
        Ok((-0.25 * self.q2(f, y_infinity)?).exp())
    }

    /// Fiber state `psi^{r,theta}(W(f)) = e_f(r, theta) exp(-q1 / 4)`.
    pub fn psi_fiber(&self, phase: &CondensatePhase, f: &TestFunction) -> Result<Complex64> {
        let e = e_fingerprint(phase, f)?;
        Ok(e * (-0.25 * self.q1(f)?).exp())
    }

    /// Two-point function `G^{r,theta}(f, g)`.
    pub fn two_point(&self, phase: &CondensatePhase, f: &TestFunction, g: &TestFunction) -> Result<TwoPoint> {
        let zf = f.zero_mode();
        let zg = g.zero_mode();
        let overlap: Complex64 = zf.iter().zip(&zg).map(|(a, b)| a * b.conj()).sum();
        let condensate = overlap * (0.5 * phase.amplitude * phase.r);
        let q1_gf = self.q1_polar(g, f)?;
        let plain = g.inner(f);
        let thermal = (q1_gf - plain) * 0.5;
        let occupation = self.occupation_form(g, f)?;
        Ok(TwoPoint { value: condensate + thermal, condensate, thermal, q1_gf, occupation })
    }

    /// `-d_t d_s psi^{r,theta}(W(t f + s g))` at `t = s = 0` for real
    /// `Re q1(g, f)`: `c r w_f w_g + Re q1(g, f) / 2` with `w = Re(e^{i theta} f^(0))`.
    pub fn field_correlation(&self, phase: &CondensatePhase, f: &TestFunction, g: &TestFunction) -> Result<f64> {
        let rot = Complex64::from_polar(1.0, phase.theta);
        let wf = (rot * f.zero_mode_scalar()?).re;
        let wg = (rot * g.zero_mode_scalar()?).re;
        Ok(phase.amplitude * phase.r * wf * wg + 0.5 * self.q1_polar(g, f)?.re)
    }

    /// Boson factor of the stationarity check under `f -> e^{i t omega} f`.
    pub fn stationarity_check(&self, f: &TestFunction, t: f64, condensate_density: f64) -> Result<StationarityReport> {
        let evolved = f.evolved(t, self.disp);
        let q1 = self.q1(f)?;
        let q1_evolved = self.q1(&evolved)?;
        let zero = f.zero_mode_norm_sq();
        let zero_evolved = if t == 0.0 { zero } else { evolved.zero_mode_norm_sq(self.tol)? };
        let c = if condensate_density == 0.0 { 0.0 } else { condensate_amplitude(self.disp, condensate_density)? };
        let before = (-0.25 * (c * zero + q1)).exp();
        let after = (-0.25 * (c * zero_evolved + q1_evolved)).exp();
        Ok(StationarityReport {
            time: t,
            gap: (after - before).abs(),
            q1_drift: (q1_evolved - q1).abs(),
            zero_mode_drift: zero_evolved - zero,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPoint {
    pub value: Complex64,
    /// `c r f^(0) conj(g^(0)) / 2`.
    pub condensate: Complex64,
    /// `(q1(g, f) - <g, f>) / 2`.
    pub thermal: Complex64,
    pub q1_gf: Complex64,
    /// `<g, e^{-beta F} (1 - e^{-beta F})^{-1} f>`; equals `thermal` analytically.
    pub occupation: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub time: f64,
    /// `|psi_BEC(W(e^{i t omega} f)) - psi_BEC(W(f))|`.
    pub gap: f64,
    pub q1_drift: f64,
    /// `|(e^{i t omega} f)^(0)|^2 - |f^(0)|^2`.
    pub zero_mode_drift: f64,
}

/// `e_f(r, theta) = exp[i sqrt(c r) Re(e^{i theta} f^(0))]`.
pub fn e_fingerprint(phase: &CondensatePhase, f: &TestFunction) -> Result<Complex64> {
    let z = f.zero_mode_scalar()?;
    let arg = (phase.amplitude * phase.r).sqrt() * (Complex64::from_polar(1.0, phase.theta) * z).re;
    Ok(Complex64::from_polar(1.0, arg))
}

/// Constant fiber density `N_i c r / (2 (2 pi)^d) + rho_c(beta)`.
pub fn fiber_density(phase: &CondensatePhase, disp: &Dispersion, beta: f64) -> Result<f64> {
    let rc = rho_crit(disp, beta)?;
    Ok(fiber_density_with(phase, disp, rc))
}

pub fn fiber_density_with(phase: &CondensatePhase, disp: &Dispersion, rho_critical: f64) -> f64 {
    disp.components() * phase.amplitude * phase.r / (2.0 * (2.0 * PI).powi(disp.dim as i32)) + rho_critical
}

/// `int g(r, theta) dchi = int_0^inf e^{-r} dr (1 / 2 pi) int_0^{2 pi} g dtheta`,
/// theta-averaged first so that the radial integrand stays smooth.
pub fn chi_average<T: QuadValue>(g: impl Fn(f64, f64) -> T) -> T {
    chi_average_with(CHI_RADIAL_NODES, CHI_ANGULAR_NODES, g)
}

pub fn chi_average_with<T: QuadValue>(radial: usize, angular: usize, g: impl Fn(f64, f64) -> T) -> T {
    let rule = gauss_laguerre(radial);
    let mut acc = T::zero();
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc = acc + periodic_mean(angular, |theta| g(r, theta)) * w;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPoint {
    /// `int psi^{r,theta}(W(f)) dchi`.
    pub mixed: Complex64,
    pub psi_bec: f64,
    pub gap: f64,
}

/// Mixes the fibers over `chi` and compares with the gauge-invariant state.
pub fn decomposition_check(forms: &FreeBosonForms, f: &TestFunction, condensate_density: f64) -> Result<DecompositionPoint> {
    let base = CondensatePhase::new(0.0, 0.0, condensate_density, forms.disp)?;
    let damping = (-0.25 * forms.q1(f)?).exp();
    let z = f.zero_mode_scalar()?;
    let c = base.amplitude;
    let mixed = chi_average(|r, theta| {
        let arg = (c * r).sqrt() * (Complex64::from_polar(1.0, theta) * z).re;
        Complex64::from_polar(1.0, arg)
    }) * damping;
    let psi_bec = (-0.25 * (c * z.norm_sqr())).exp() * damping;
    Ok(DecompositionPoint { mixed, psi_bec, gap: (mixed - psi_bec).norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonon_gas::RadialProfile;
    use num_complex::Complex64 as C;

    fn disp() -> Dispersion {
        Dispersion::default_massive()
    }

    fn bump(center: [f64; 3], width: f64, amp: C) -> TestFunction {
        TestFunction::gaussian(center.to_vec(), width, amp).unwrap()
    }

    #[test]
    fn q0_scalar_example() {
        let mut d = disp();
        d.dim = 1;
        let f = TestFunction::gaussian(vec![0.0], 1.0, C::new(1.0, 0.0)).unwrap();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let q0 = forms.q0(&f, 0.1).unwrap();
        assert!((q0 - 2.0 * 2.0 * PI * 0.1).abs() < 1e-14);
        assert!((q0 - 1.25664).abs() < 1e-5);
    }

    #[test]
    fn q2_approaches_norm_at_large_fugacity() {
        let d = disp();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let f = bump([0.5, 0.2, 0.0], 0.6, C::new(0.7, 0.3));
        let q2 = forms.q2(&f, 1e6).unwrap();
        assert!((q2 - f.norm_sq()).abs() <= 1e-6 * f.norm_sq().max(1.0), "{q2} vs {}", f.norm_sq());
    }

    #[test]
    fn q1_against_geometric_series() {
        // coth(x/2) = 1 + 2 sum_m e^{-m x}; for F = k^2 and |f|^2 = |A|^2 e^{-|k-c|^2/s^2}
        // every term is a Gaussian integral in closed form.
        let d = disp();
        let beta = 0.7;
        let forms = FreeBosonForms::new(&d, beta).unwrap();
        let (c, s, amp) = ([1.0, -0.5, 0.3], 0.5, C::new(1.0, -0.5));
        let f = bump(c, s, amp);
        let c2: f64 = c.iter().map(|x| x * x).sum();
        let term = |a: f64| {
            let p = 1.0 / (s * s) + a;
            amp.norm_sqr() * (PI / p).powf(1.5) * (-a * c2 / (1.0 + a * s * s)).exp()
        };
        let m_max = 2_000_000u64;
        let mut series = 0.0;
        for m in (1..=m_max).rev() {
            series += term(m as f64 * beta);
        }
        // Midpoint rule for the tail sum; its error is far below the tolerance.
        let tail = crate::quadrature::integrate(|m: f64| term(m * beta), m_max as f64 + 0.5, 1e12, Tolerance::default())
            .unwrap()
            .value;
        // Beyond m = 1e12 the terms are |A|^2 (pi / (m beta))^{3/2} e^{-|c|^2/s^2} to 1e-12.
        let far = amp.norm_sqr() * (PI / beta).powf(1.5) * (-c2 / (s * s)).exp() * 2.0 / 1e6;
        let want = term(0.0) + 2.0 * (series + tail + far);
        let q1 = forms.q1(&f).unwrap();
        assert!((q1 - want).abs() < 1e-8 * want, "{q1} vs {want}");
    }

    #[test]
    fn q1_diverges_without_infrared_condition() {
        let mut d = disp();
        d.dim = 1;
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let f = TestFunction::gaussian(vec![0.0], 1.0, C::new(1.0, 0.0)).unwrap();
        assert!(matches!(forms.q1(&f), Err(Error::InfraredDivergence(_))));
        let lin = Dispersion { profile: RadialProfile::Relativistic { mass: 0.0, speed: 1.0 }, ..disp() };
        let forms = FreeBosonForms::new(&lin, 1.0).unwrap();
        assert!(forms.q1(&bump([0.0; 3], 1.0, C::new(1.0, 0.0))).is_ok());
    }

    #[test]
    fn psi_values() {
        let d = disp();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let zero = TestFunction::zero(3, 1);
        assert_eq!(forms.psi_bec(&zero, 0.3).unwrap(), 1.0);
        let f = bump([0.4, 0.0, 0.0], 0.5, C::new(0.8, 0.1));
        let with = forms.psi_bec(&f, 0.3).unwrap();
        let without = (-0.25 * forms.q1(&f).unwrap()).exp();
        assert!(with < without && with > 0.0);
        assert_eq!(forms.psi_bec(&f, 0.0).unwrap(), without);
    }

    #[test]
    fn fiber_basics() {
        let d = disp();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let f = bump([0.4, 0.0, 0.0], 0.5, C::new(0.8, 0.0));
        let p0 = CondensatePhase::new(0.0, 1.0, 0.2, &d).unwrap();
        assert_eq!(e_fingerprint(&p0, &f).unwrap(), C::new(1.0, 0.0));
        let p = p0.with_label(1.3, 0.4).unwrap();
        let e = e_fingerprint(&p, &f).unwrap();
        assert!((e.norm() - 1.0).abs() < 1e-15);
        let flipped = e_fingerprint(&p.rotated(PI), &f).unwrap();
        assert!((flipped - e.conj()).norm() < 1e-13);
        let psi = forms.psi_fiber(&p, &f).unwrap();
        assert!(psi.norm() <= 1.0);
        assert!(CondensatePhase::new(1.0, 0.0, 0.0, &d).is_err());
        assert!((CondensatePhase::new(1.0, -0.5, 0.2, &d).unwrap().theta - (2.0 * PI - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn chi_is_a_probability_measure() {
        assert!((chi_average(|_, _| 1.0) - 1.0).abs() < 1e-12);
        assert!((chi_average(|r, _| r) - 1.0).abs() < 1e-10);
        assert!(chi_average(|_, theta: f64| theta.cos()).abs() < 1e-14);
    }

    #[test]
    fn decomposition_reproduces_bec_state() {
        let d = disp();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let f = bump([0.3, 0.0, 0.2], 0.5, C::new(0.6, -0.4));
        let p = decomposition_check(&forms, &f, 0.5).unwrap();
        assert!(p.gap <= 1e-6, "{p:?}");
        // The analytic pieces: theta-average then radial Laplace transform.
        let base = CondensatePhase::new(0.0, 0.0, 0.5, &d).unwrap();
        let damping = (-0.25 * forms.q1(&f).unwrap()).exp();
        let direct = chi_average(|r, theta| e_fingerprint(&base.with_label(r, theta).unwrap(), &f).unwrap().re) * damping;
        assert!((direct - p.psi_bec).abs() < 1e-6);
    }

    #[test]
    fn fiber_density_average() {
        let d = disp();
        let rc = rho_crit(&d, 1.0).unwrap();
        let p = CondensatePhase::new(0.0, 0.0, 0.7, &d).unwrap();
        assert_eq!(fiber_density(&p, &d, 1.0).unwrap(), rc);
        let one = p.with_label(1.0, 2.0).unwrap();
        assert!((fiber_density(&one, &d, 1.0).unwrap() - (0.7 + rc)).abs() < 1e-14);
        let mean = chi_average(|r, theta| fiber_density_with(&p.with_label(r, theta).unwrap(), &d, rc));
        assert!((mean - (0.7 + rc)).abs() < 1e-10);
    }

    #[test]
    fn two_point_properties() {
        let d = disp();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let f = bump([0.5, 0.0, 0.0], 0.5, C::new(0.9, 0.2));
        let g = bump([0.0, 0.4, 0.0], 0.7, C::new(-0.3, 0.6));
        let p = CondensatePhase::new(0.8, 1.1, 0.3, &d).unwrap();
        let ff = forms.two_point(&p.with_label(0.0, 0.0).unwrap(), &f, &f).unwrap();
        assert!(ff.value.re >= 0.0 && ff.value.im.abs() < 1e-12);
        assert!((ff.q1_gf.re - forms.q1(&f).unwrap()).abs() <= 1e-10 * ff.q1_gf.re);
        let fg = forms.two_point(&p, &f, &g).unwrap();
        assert!((fg.thermal - fg.occupation).norm() < 1e-8, "{fg:?}");
        // theta-average of the field correlation is Re G + Re<g,f>/2.
        let mean = periodic_mean(64, |t| forms.field_correlation(&p.with_label(0.8, t).unwrap(), &f, &g).unwrap());
        let want = fg.value.re + 0.5 * g.inner(&f).re;
        assert!((mean - want).abs() < 1e-9, "{mean} vs {want}");
    }

    #[test]
    fn stationarity_of_bec_state() {
        let d = disp();
        let forms = FreeBosonForms::new(&d, 1.0).unwrap();
        let f = bump([0.6, 0.0, 0.0], 0.3, C::new(1.0, 0.0));
        assert_eq!(forms.stationarity_check(&f, 0.0, 0.3).unwrap().gap, 0.0);
        // Opposite bumps related by a rotation: f^(0) = 0 and, omega being
        // radial, the evolved zero mode vanishes too.
        let off = bump([1.5, 0.0, 0.0], 0.3, C::new(1.0, 0.0)).sum(&bump([0.0, 1.5, 0.0], 0.3, C::new(-1.0, 0.0))).unwrap();
        assert_eq!(off.zero_mode_norm_sq(), 0.0);
        let s = forms.stationarity_check(&off, 0.7, 0.3).unwrap();
        assert!(s.gap <= 1e-10 && s.q1_drift <= 1e-10, "{s:?}");
        let narrow = bump([0.0; 3], 0.2, C::new(1.0, 0.0));
        let s = forms.stationarity_check(&narrow, 0.1, 0.3).unwrap();
        assert!(s.zero_mode_drift < 0.0 && s.gap > 0.0);
        assert!(s.q1_drift <= 1e-10);
    }
}
