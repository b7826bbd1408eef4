//! The two integral identities behind the fiber decomposition: a Laplace
//! transform of `J0(sqrt(b r))` and the angular average of a plane wave.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, periodic_mean, Tolerance};
use crate::special::bessel_j0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityGap {
    pub quadrature: f64,
    pub closed_form: f64,
    pub gap: f64,
}

/// `int_0^inf e^{-a r} J0(sqrt(b r)) dr` against `e^{-b / 4a} / a`.
///
/// Substituting `r = s^2` gives the smooth Gaussian-damped integrand
/// `2 s e^{-a s^2} J0(sqrt(b) s)`, cut where `e^{-a s^2} < e^{-60}`.
pub fn bessel_identity_check(a: f64, b: f64) -> Result<IdentityGap> {
    if !(a > 0.0) || !(b >= 0.0) {
        return Err(Error::domain(format!("need a > 0 and b >= 0, got ({a}, {b})")));
    }
    let sb = b.sqrt();
    let s_max = (60.0 / a).sqrt();
    let res = integrate(|s: f64| 2.0 * s * (-a * s * s).exp() * bessel_j0(sb * s), 0.0, s_max, Tolerance::new(1e-15, 1e-13))?;
    let closed_form = (-b / (4.0 * a)).exp() / a;
    Ok(IdentityGap { quadrature: res.value, closed_form, gap: (res.value - closed_form).abs() })
}

/// `(1 / 2 pi) int e^{i (p cos theta + q sin theta)} dtheta` against `J0(sqrt(p^2 + q^2))`.
pub fn angular_identity_check(p: f64, q: f64) -> Result<IdentityGap> {
    if !p.is_finite() || !q.is_finite() {
        return Err(Error::domain("angular identity needs finite arguments"));
    }
    let rho = p.hypot(q);
    // Trapezoid error ~ J_n(rho) with n the node count; n > e rho / 2 + 40 is ample.
    let n = (2.0 * rho) as usize + 64;
    let mean: Complex64 = periodic_mean(n, |t: f64| Complex64::from_polar(1.0, p * t.cos() + q * t.sin()));
    let closed_form = bessel_j0(rho);
    Ok(IdentityGap { quadrature: mean.re, closed_form, gap: (mean - closed_form).norm() })
}
