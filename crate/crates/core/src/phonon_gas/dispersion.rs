//! Radial phonon dispersions `omega(k) = r(|k|)` and checks of the
//! conditions the thermodynamic analysis relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_from_zero_smoothed, Tolerance};
use crate::special::unit_sphere_area;

/// Tabulated radial profile with monotone cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTable {
    pub k: Vec<f64>,
    pub r: Vec<f64>,
    /// Derivatives at the nodes, clamped on construction so that the
    /// interpolant is monotone wherever the data are.
    pub dr: Vec<f64>,
}

impl RadialTable {
    pub fn new(k: Vec<f64>, r: Vec<f64>, dr: Vec<f64>) -> Result<Self> {
        let n = k.len();
        if n < 2 || r.len() != n || dr.len() != n {
            return Err(Error::domain("radial table needs at least two (k, r, r') rows of equal length"));
        }
        if k[0] != 0.0 {
            return Err(Error::domain("radial table must start at k = 0"));
        }
        if k.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("radial table abscissae must be strictly increasing"));
        }
        let mut dr = dr;
        // Fritsch–Carlson limiter.
        for i in 0..n - 1 {
            let h = k[i + 1] - k[i];
            let delta = (r[i + 1] - r[i]) / h;
            if delta == 0.0 {
                dr[i] = 0.0;
                dr[i + 1] = 0.0;
                continue;
            }
            let a = dr[i] / delta;
            let b = dr[i + 1] / delta;
            if a < 0.0 {
                dr[i] = 0.0;
            }
            if b < 0.0 {
                dr[i + 1] = 0.0;
            }
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                dr[i] = tau * a * delta;
                dr[i + 1] = tau * b * delta;
            }
        }
        Ok(Self { k, r, dr })
    }

    fn locate(&self, x: f64) -> usize {
        match self.k.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.k.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.k.len() - 2),
        }
    }

    /// `r(x) - r(0)`, accumulated from segment increments so that small
    /// excesses near the origin keep full relative precision.
    fn excess(&self, x: f64) -> f64 {
        let last = self.k.len() - 1;
        if x >= self.k[last] {
            return self.r[last] - self.r[0] + self.dr[last] * (x - self.k[last]);
        }
        let i = self.locate(x);
        let h = self.k[i + 1] - self.k[i];
        let t = (x - self.k[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        (self.r[i] - self.r[0]) + h01 * (self.r[i + 1] - self.r[i]) + h10 * h * self.dr[i] + h11 * h * self.dr[i + 1]
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let last = self.k.len() - 1;
        if x >= self.k[last] {
            let slope = self.dr[last];
            return (self.r[last] + slope * (x - self.k[last]), slope);
        }
        let i = self.locate(x);
        let h = self.k[i + 1] - self.k[i];
        let t = (x - self.k[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.r[i] + h10 * h * self.dr[i] + h01 * self.r[i + 1] + h11 * h * self.dr[i + 1];
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        let d = d00 * self.r[i] + d10 * self.dr[i] + d01 * self.r[i + 1] + d11 * self.dr[i + 1];
        (v, d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    /// `r(k) = gap + coefficient * k^exponent`.
    Power { gap: f64, coefficient: f64, exponent: f64 },
    /// `r(k) = sqrt(mass^2 + (speed k)^2)`.
    Relativistic { mass: f64, speed: f64 },
    Tabulated(RadialTable),
    /// `r(k) = value`; never admissible, kept for validation tests.
    Constant { value: f64 },
}

impl RadialProfile {
    pub fn quadratic(gap: f64) -> Self {
        RadialProfile::Power { gap, coefficient: 1.0, exponent: 2.0 }
    }

    pub fn value(&self, k: f64) -> f64 {
        match self {
            RadialProfile::Power { gap, coefficient, exponent } => gap + coefficient * k.powf(*exponent),
            RadialProfile::Relativistic { mass, speed } => mass.hypot(speed * k),
            RadialProfile::Tabulated(t) => t.eval(k).0,
            RadialProfile::Constant { value } => *value,
        }
    }

    pub fn derivative(&self, k: f64) -> f64 {
        match self {
            RadialProfile::Power { coefficient, exponent, .. } => {
                if k == 0.0 {
                    if *exponent == 1.0 {
                        *coefficient
                    } else if *exponent < 1.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    coefficient * exponent * k.powf(exponent - 1.0)
                }
            }
            RadialProfile::Relativistic { mass, speed } => {
                let w = mass.hypot(speed * k);
                if w == 0.0 {
                    *speed
                } else {
                    speed * speed * k / w
                }
            }
            RadialProfile::Tabulated(t) => t.eval(k).1,
            RadialProfile::Constant { .. } => 0.0,
        }
    }

    /// `r(k) - r(0)`, evaluated without cancellation where possible.
    pub fn excess(&self, k: f64) -> f64 {
        match self {
            RadialProfile::Power { coefficient, exponent, .. } => coefficient * k.powf(*exponent),
            RadialProfile::Relativistic { mass, speed } => {
                let vk = speed * k;
                vk * vk / (mass.hypot(vk) + mass.abs())
            }
            RadialProfile::Tabulated(t) => t.excess(k),
            RadialProfile::Constant { .. } => 0.0,
        }
    }

    /// Exponent `p` with `r(k) - r(0) ~ C k^p` as `k -> 0`; infinite when the
    /// excess vanishes identically.
    pub fn small_k_exponent(&self) -> f64 {
        match self {
            RadialProfile::Power { coefficient, exponent, .. } => {
                if *coefficient == 0.0 {
                    f64::INFINITY
                } else {
                    *exponent
                }
            }
            RadialProfile::Relativistic { mass, speed } => {
                if *speed == 0.0 {
                    f64::INFINITY
                } else if *mass == 0.0 {
                    1.0
                } else {
                    2.0
                }
            }
            RadialProfile::Tabulated(t) => {
                if t.dr[0] > 0.0 {
                    return 1.0;
                }
                let h = t.k[1];
                // Second derivative of the first Hermite segment at 0.
                let c2 = (6.0 * (t.r[1] - t.r[0]) / h - 4.0 * t.dr[0] - 2.0 * t.dr[1]) / h;
                if c2 != 0.0 {
                    2.0
                } else {
                    3.0
                }
            }
            RadialProfile::Constant { .. } => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub profile: RadialProfile,
    pub dim: usize,
    /// Exponent `d0 > d` controlling the decay `(1 + k)^{d0} e^{-beta omega}`.
    pub growth_exponent: f64,
    pub chemical_potential: f64,
    /// Number of internal phonon components; multiplies every density.
    pub internal_components: usize,
}

impl Dispersion {
    /// `omega(k) = k^2 + 1` in three dimensions with `d0 = 4`, `mu = 0`, one component.
    pub fn default_massive() -> Self {
        Self {
            profile: RadialProfile::quadratic(1.0),
            dim: 3,
            growth_exponent: 4.0,
            chemical_potential: 0.0,
            internal_components: 1,
        }
    }

    pub fn omega(&self, k: f64) -> f64 {
        self.profile.value(k)
    }

    pub fn omega_at(&self, k: &[f64]) -> f64 {
        self.omega(norm(k))
    }

    /// `omega(k) - mu`, the single-phonon energy entering `H_b`.
    pub fn boson_energy(&self, k: f64) -> f64 {
        self.omega(k) - self.chemical_potential
    }

    pub fn omega0(&self) -> f64 {
        self.profile.value(0.0)
    }

    /// `F(k) = omega(k) - omega(0) >= 0`.
    pub fn excess(&self, k: f64) -> f64 {
        self.profile.excess(k)
    }

    pub fn excess_at(&self, k: &[f64]) -> f64 {
        self.excess(norm(k))
    }

    /// `y = e^{beta (omega0 - mu)}`.
    pub fn fugacity(&self, beta: f64) -> f64 {
        (beta * (self.omega0() - self.chemical_potential)).exp()
    }

    pub fn components(&self) -> f64 {
        self.internal_components as f64
    }

    /// Smallest radius with `beta F(k) >= target`, by doubling and bisection.
    pub fn radius_where_excess_reaches(&self, beta: f64, target: f64) -> f64 {
        let g = |k: f64| beta * self.excess(k) - target;
        if g(0.0) >= 0.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while g(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        hi
    }

    pub fn check(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        if self.internal_components == 0 {
            return Err(Error::domain("need at least one internal component"));
        }
        Ok(())
    }
}

pub(crate) fn norm(k: &[f64]) -> f64 {
    k.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    /// Quantity that decided the outcome.
    pub witness: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_MONOTONE: &str = "strictly-increasing";
pub const CHECK_UNBOUNDED: &str = "unbounded";
pub const CHECK_GROWTH_EXPONENT: &str = "growth-exponent-exceeds-dimension";
pub const CHECK_DECAY: &str = "weighted-boltzmann-bounded";
pub const CHECK_INFRARED: &str = "infrared-integrable";
pub const CHECK_GAP: &str = "positive-gap";

/// Evaluates every admissibility condition on the dispersion at inverse
/// temperature `beta`; never fails, reports instead.
pub fn validate_dispersion(disp: &Dispersion, beta: f64) -> ValidationReport {
    let mut checks = Vec::new();
    let p = &disp.profile;

    // Sample grid: logarithmic near zero, linear out to where beta*omega is large.
    let k_far = disp.radius_where_excess_reaches(beta, 60.0).min(1e6);
    let k_far = if k_far.is_finite() && k_far > 0.0 { k_far } else { 1e3 };
    let mut grid: Vec<f64> = (0..200).map(|i| 1e-8 * (k_far / 1e-8).powf(i as f64 / 199.0)).collect();
    grid.extend((1..=2000).map(|i| k_far * i as f64 / 2000.0));
    grid.sort_by(f64::total_cmp);

    let min_slope = grid.iter().map(|&k| p.derivative(k)).fold(f64::INFINITY, f64::min);
    checks.push(ConditionCheck {
        name: CHECK_MONOTONE.into(),
        passed: min_slope > 0.0 && min_slope.is_finite(),
        witness: min_slope,
        detail: "minimum of r'(k) over sampled k > 0".into(),
    });

    let far_value = p.value(1e8);
    let near_value = p.value(0.0);
    checks.push(ConditionCheck {
        name: CHECK_UNBOUNDED.into(),
        passed: far_value.is_finite() && far_value > near_value + 1e4,
        witness: far_value,
        detail: "r(1e8), must grow without bound".into(),
    });

    let d = disp.dim as f64;
    checks.push(ConditionCheck {
        name: CHECK_GROWTH_EXPONENT.into(),
        passed: disp.growth_exponent > d,
        witness: disp.growth_exponent - d,
        detail: "d0 - d".into(),
    });

    // sup (1+k)^{d0} e^{-beta r(k)}: evaluate in log form; past the last grid
    // point the log-derivative must stay negative.
    let log_weight = |k: f64| disp.growth_exponent * (1.0 + k).ln() - beta * p.value(k);
    let mut grid0 = vec![0.0];
    grid0.extend(&grid);
    let best = (0..grid0.len())
        .max_by(|&a, &b| log_weight(grid0[a]).total_cmp(&log_weight(grid0[b])))
        .unwrap_or(0);
    // Golden-section polish between the neighbours of the best sample.
    let (mut lo, mut hi) = (grid0[best.saturating_sub(1)], grid0[(best + 1).min(grid0.len() - 1)]);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if log_weight(x1) < log_weight(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let sup_log = log_weight(0.5 * (lo + hi)).max(log_weight(grid0[best]));
    let tail_slope = |k: f64| disp.growth_exponent / (1.0 + k) - beta * p.derivative(k);
    let tail_decreasing = (0..50).all(|i| tail_slope(k_far * (1.0 + i as f64)) < 0.0);
    checks.push(ConditionCheck {
        name: CHECK_DECAY.into(),
        passed: sup_log.is_finite() && tail_decreasing,
        witness: sup_log.exp(),
        detail: "sup over sampled k of (1+k)^d0 exp(-beta r(k)); tail must be decreasing".into(),
    });

    let exponent = p.small_k_exponent();
    let infrared = if d > exponent {
        let area = unit_sphere_area(disp.dim);
        let value = integrate_from_zero_smoothed(
            |k: f64| {
                let f = p.excess(k);
                if f > 0.0 {
                    k.powf(d - 1.0) / f
                } else {
                    0.0
                }
            },
            1.0,
            4,
            Tolerance::new(1e-10, 1e-10),
        );
        match value {
            Ok(r) => (true, area * r.value),
            Err(_) => (false, f64::INFINITY),
        }
    } else {
        (false, f64::INFINITY)
    };
    checks.push(ConditionCheck {
        name: CHECK_INFRARED.into(),
        passed: infrared.0 && infrared.1.is_finite(),
        witness: infrared.1,
        detail: format!("integral of 1/(omega(k) - omega0) over |k| <= 1; small-k exponent {exponent}"),
    });

    let gap = disp.omega0() - disp.chemical_potential;
    checks.push(ConditionCheck {
        name: CHECK_GAP.into(),
        passed: gap > 0.0,
        witness: disp.fugacity(beta),
        detail: "y = exp(beta (omega0 - mu)) must exceed 1".into(),
    });

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_dispersion_passes() {
        let report = validate_dispersion(&Dispersion::default_massive(), 1.0);
        assert!(report.all_passed(), "{:#?}", report.failures().collect::<Vec<_>>());
        // int_{|k|<=1} dk / k^2 = 4 pi in three dimensions.
        let ir = report.get(CHECK_INFRARED).unwrap();
        assert!((ir.witness - 4.0 * PI).abs() < 1e-8);
        // sup_k (1+k)^4 e^{-(k^2+1)} from the stationarity condition 4/(1+k) = 2k.
        let k_star = 1.0;
        let want = (1.0f64 + k_star).powi(4) * (-(k_star * k_star + 1.0)).exp();
        assert!((report.get(CHECK_DECAY).unwrap().witness - want).abs() < 1e-6);
    }

    #[test]
    fn constant_profile_fails_monotonicity() {
        let disp = Dispersion { profile: RadialProfile::Constant { value: 1.0 }, ..Dispersion::default_massive() };
        let report = validate_dispersion(&disp, 1.0);
        assert!(!report.get(CHECK_MONOTONE).unwrap().passed);
    }

    #[test]
    fn zero_gap_fails() {
        let disp = Dispersion { chemical_potential: 1.0, ..Dispersion::default_massive() };
        let report = validate_dispersion(&disp, 1.0);
        assert!(!report.get(CHECK_GAP).unwrap().passed);
        assert!(report.get(CHECK_MONOTONE).unwrap().passed);
    }

    #[test]
    fn two_dimensional_quadratic_is_infrared_divergent() {
        let disp = Dispersion { dim: 2, growth_exponent: 3.0, ..Dispersion::default_massive() };
        assert!(!validate_dispersion(&disp, 1.0).get(CHECK_INFRARED).unwrap().passed);
    }

    #[test]
    fn growth_exponent_must_exceed_dimension() {
        let disp = Dispersion { growth_exponent: 3.0, ..Dispersion::default_massive() };
        assert!(!validate_dispersion(&disp, 1.0).get(CHECK_GROWTH_EXPONENT).unwrap().passed);
    }

    #[test]
    fn relativistic_excess_has_no_cancellation() {
        let p = RadialProfile::Relativistic { mass: 1.0, speed: 1.0 };
        let k = 1e-9;
        assert!((p.excess(k) / (0.5 * k * k) - 1.0).abs() < 1e-12);
        assert_eq!(p.small_k_exponent(), 2.0);
    }

    #[test]
    fn tabulated_profile_reproduces_quadratic() {
        let ks: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let table = RadialTable::new(
            ks.clone(),
            ks.iter().map(|k| k * k + 1.0).collect(),
            ks.iter().map(|k| 2.0 * k).collect(),
        )
        .unwrap();
        let p = RadialProfile::Tabulated(table);
        for &k in &[0.1, 0.77, 3.3, 9.9] {
            assert!((p.value(k) - (k * k + 1.0)).abs() < 1e-12);
            assert!((p.derivative(k) - 2.0 * k).abs() < 1e-12);
        }
        assert_eq!(p.small_k_exponent(), 2.0);
        let disp = Dispersion { profile: p, ..Dispersion::default_massive() };
        assert!(validate_dispersion(&disp, 1.0).all_passed());
    }
}
