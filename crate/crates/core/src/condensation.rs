//! Fugacity equation in a finite box, phase classification in the
//! thermodynamic limit, condensate sequences and the critical temperature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phonon_gas::{bose_factor, boson_number_finite, rho_crit, rho_fr, Dispersion, FugacityExcess, LatticeModes};
use crate::roots::{count_sign_changes, solve_bracketed, RootOptions};

/// Residual certified for every fugacity solution.
pub const FUGACITY_RESIDUAL: f64 = 1e-10;
/// Band `|rho - rho_c| <= CRITICAL_BAND` classified as critical.
pub const CRITICAL_BAND: f64 = 1e-9;

/// `f_L(y) = N_{b,L}(y) / L^d`.
pub fn finite_density(modes: &LatticeModes, disp: &Dispersion, u: FugacityExcess, infrared_number: f64) -> Result<f64> {
    Ok(boson_number_finite(modes, disp, u, infrared_number)?.total / modes.volume())
}

/// `sum_{k in Gamma_L^d} e^{-beta F(k)}`, including the certified tail bound so
/// that estimates built on it stay rigorous after truncation.
pub fn boltzmann_sum(modes: &LatticeModes) -> f64 {
    modes.included_weight + modes.tail_bound
}

/// `y_L - 1 <= N_i / (rho - rho_ir) L^{-d} (1 + sum_{k in Gamma_L^d} e^{-beta F(k)})`.
pub fn bracket_bound(modes: &LatticeModes, disp: &Dispersion, target: f64, infrared_density: f64) -> Result<f64> {
    if !(target > infrared_density) {
        return Err(Error::UnsolvableDensity { target, infrared: infrared_density });
    }
    Ok(disp.components() / (target - infrared_density) / modes.volume() * (1.0 + boltzmann_sum(modes)))
}

/// `C = N_i L^{-d} a^{-2} sum_{k in Gamma_L^d} e^{-beta F(k)}`, a Lipschitz
/// constant of `f_L` on `y >= 1 + a`.
pub fn lipschitz_constant(modes: &LatticeModes, disp: &Dispersion, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("Lipschitz margin must be positive, got {a}")));
    }
    Ok(disp.components() / modes.volume() / (a * a) * boltzmann_sum(modes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FugacitySolution {
    pub box_size: f64,
    pub beta: f64,
    /// `y_L - 1`.
    pub fugacity_excess: f64,
    /// `|f_L(y_L) - rho|`.
    pub residual: f64,
    pub bracket_bound: f64,
    pub target_density: f64,
    /// `rho_ir = N_ir / L^d`.
    pub infrared_density: f64,
    pub iterations: usize,
}

impl FugacitySolution {
    pub fn fugacity(&self) -> f64 {
        1.0 + self.fugacity_excess
    }

    pub fn excess(&self) -> FugacityExcess {
        FugacityExcess(self.fugacity_excess)
    }
}

/// Solves `f_L(y) = target` on a prepared lattice. `f_L` decreases strictly
/// from `+inf` at `y = 1` to `rho_ir` at `y = inf`, so the root is unique.
pub fn solve_fugacity_on(
    modes: &LatticeModes,
    disp: &Dispersion,
    target: f64,
    infrared_number: f64,
) -> Result<FugacitySolution> {
    let infrared_density = infrared_number / modes.volume();
    let bound = bracket_bound(modes, disp, target, infrared_density)?;
    let g = |u: f64| match finite_density(modes, disp, FugacityExcess(u), infrared_number) {
        Ok(v) => v - target,
        Err(_) => f64::NAN,
    };
    let hi = bound + 1.0;
    let mut lo = 1e-14f64.min(0.5 * bound);
    while g(lo) < 0.0 {
        lo *= 1e-4;
        if lo < 1e-300 {
            return Err(Error::NoConvergence("fugacity root lies below 1 + 1e-300".into()));
        }
    }
    let opts = RootOptions { logarithmic: true, residual: 1e-13 * target.max(1.0), ..RootOptions::default() };
    let root = solve_bracketed(g, lo, hi, opts)?;
    let residual = root.value.abs();
    if !(residual <= FUGACITY_RESIDUAL) {
        return Err(Error::NoConvergence(format!("fugacity residual {residual:.3e} above {FUGACITY_RESIDUAL:.0e}")));
    }
    Ok(FugacitySolution {
        box_size: modes.box_size,
        beta: modes.beta,
        fugacity_excess: root.x,
        residual,
        bracket_bound: bound,
        target_density: target,
        infrared_density,
        iterations: root.iterations,
    })
}

/// Builds the lattice for `(L, beta)` and solves the fugacity equation.
pub fn solve_fugacity(
    disp: &Dispersion,
    box_size: f64,
    beta: f64,
    target: f64,
    infrared_number: f64,
) -> Result<FugacitySolution> {
    let modes = LatticeModes::new(disp, box_size, beta)?;
    solve_fugacity_on(&modes, disp, target, infrared_number)
}

/// Number of sign changes of `f_L(y) - target` on a log-spaced grid of `n`
/// points in `y - 1 in [lo, hi]`.
pub fn fugacity_sign_changes(
    modes: &LatticeModes,
    disp: &Dispersion,
    target: f64,
    infrared_number: f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> usize {
    let beta = modes.beta;
    // Shell table once, then a cheap scalar function of u.
    let table: Vec<(f64, f64)> =
        modes.shells.iter().map(|s| (s.count() as f64, beta * disp.excess(modes.shell_momentum(s)))).collect();
    let ni = disp.components();
    let vol = modes.volume();
    let g = |t: f64| {
        let u = FugacityExcess(t.exp());
        let nonzero: f64 = table.iter().map(|&(m, bf)| m * bose_factor(u, bf)).sum();
        (ni / u.0 + infrared_number + ni * nonzero) / vol - target
    };
    count_sign_changes(g, lo.ln(), hi.ln(), n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Condensed,
    Normal,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub phase: Phase,
    /// Limit fugacity `y_inf`; `1` unless normal.
    pub y_infinity: f64,
    /// `b` with `rho_fr(beta, b) = rho` in the normal phase.
    pub normal_fugacity: Option<f64>,
    /// Residual of the normal-phase equation.
    pub normal_residual: Option<f64>,
    pub condensate_density: f64,
    pub rho_crit: f64,
    pub target_density: f64,
    pub beta: f64,
}

/// Solves `rho_fr(beta, y) = target` for `target < rho_c`, returning `y - 1`.
pub fn solve_normal_fugacity(disp: &Dispersion, beta: f64, target: f64) -> Result<(FugacityExcess, f64)> {
    if !(target > 0.0) {
        return Err(Error::domain(format!("density must be positive, got {target}")));
    }
    let g = |u: f64| match rho_fr(disp, beta, FugacityExcess(u)) {
        Ok(v) => v - target,
        Err(_) => f64::NAN,
    };
    let mut hi = 1.0;
    while g(hi) > 0.0 {
        hi *= 10.0;
        if hi > 1e300 {
            return Err(Error::NoConvergence("density too small for any fugacity".into()));
        }
    }
    let mut lo = 1e-8f64.min(0.5 * hi);
    while g(lo) < 0.0 {
        lo *= 1e-4;
        if lo < 1e-200 {
            return Err(Error::NoConvergence("normal fugacity indistinguishable from 1".into()));
        }
    }
    let opts = RootOptions { logarithmic: true, residual: 1e-13, ..RootOptions::default() };
    let root = solve_bracketed(g, lo, hi, opts)?;
    Ok((FugacityExcess(root.x), root.value.abs()))
}

/// Thermodynamic-limit phase at density `target`.
pub fn classify_phase(disp: &Dispersion, beta: f64, target: f64) -> Result<PhaseReport> {
    let rc = rho_crit(disp, beta)?;
    let base = PhaseReport {
        phase: Phase::Critical,
        y_infinity: 1.0,
        normal_fugacity: None,
        normal_residual: None,
        condensate_density: 0.0,
        rho_crit: rc,
        target_density: target,
        beta,
    };
    if (target - rc).abs() <= CRITICAL_BAND {
        return Ok(PhaseReport { normal_fugacity: Some(1.0), ..base });
    }
    if target > rc {
        return Ok(PhaseReport { phase: Phase::Condensed, condensate_density: target - rc, ..base });
    }
    let (u, residual) = solve_normal_fugacity(disp, beta, target)?;
    Ok(PhaseReport {
        phase: Phase::Normal,
        y_infinity: u.fugacity(),
        normal_fugacity: Some(u.fugacity()),
        normal_residual: Some(residual),
        ..base
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensatePoint {
    pub box_size: f64,
    pub fugacity_excess: f64,
    pub residual: f64,
    /// `N_{b,0}(y_L) / L^d = (N_i / (y_L - 1) + N_ir) / L^d`.
    pub zero_mode_density: f64,
    /// `N_ir / L^d`.
    pub infrared_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensateSequence {
    pub points: Vec<CondensatePoint>,
    /// Intercept `a` of the least-squares fit `a + b / L` to the last three points.
    pub extrapolated: Option<f64>,
    pub phase: PhaseReport,
}

/// Solves the fugacity equation along increasing box sizes and reports the
/// zero-mode density, with a `1/L` extrapolation of the limit.
pub fn condensate_sequence(
    disp: &Dispersion,
    beta: f64,
    target: f64,
    box_sizes: &[f64],
    infrared_number: f64,
) -> Result<CondensateSequence> {
    if box_sizes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("box sizes must be strictly increasing"));
    }
    let phase = classify_phase(disp, beta, target)?;
    let points: Vec<CondensatePoint> = box_sizes
        .par_iter()
        .map(|&l| {
            let sol = solve_fugacity(disp, l, beta, target, infrared_number)?;
            let vol = l.powi(disp.dim as i32);
            Ok(CondensatePoint {
                box_size: l,
                fugacity_excess: sol.fugacity_excess,
                residual: sol.residual,
                zero_mode_density: (disp.components() / sol.fugacity_excess + infrared_number) / vol,
                infrared_density: infrared_number / vol,
            })
        })
        .collect::<Result<_>>()?;
    let extrapolated = (points.len() >= 3).then(|| {
        let tail = &points[points.len() - 3..];
        fit_inverse_size(&tail.iter().map(|p| (p.box_size, p.zero_mode_density)).collect::<Vec<_>>()).0
    });
    Ok(CondensateSequence { points, extrapolated, phase })
}

/// Least-squares fit `v = a + b / L`, returning `(a, b)`.
pub fn fit_inverse_size(data: &[(f64, f64)]) -> (f64, f64) {
    let n = data.len() as f64;
    let sx: f64 = data.iter().map(|(l, _)| 1.0 / l).sum();
    let sy: f64 = data.iter().map(|(_, v)| v).sum();
    let sxx: f64 = data.iter().map(|(l, _)| 1.0 / (l * l)).sum();
    let sxy: f64 = data.iter().map(|(l, v)| v / l).sum();
    let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let a = (sy - b * sx) / n;
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalTemperature {
    pub beta_c: f64,
    /// `T_c = 1 / beta_c`.
    pub temperature: f64,
    /// `|rho_c(beta_c) - rho|`.
    pub residual: f64,
}

/// Solves `rho_c(beta_c) = target` on `[beta_lo, beta_hi]`, after checking
/// on a sample that `rho_c` is monotone there.
pub fn critical_temperature(disp: &Dispersion, target: f64, beta_lo: f64, beta_hi: f64) -> Result<CriticalTemperature> {
    if !(beta_lo > 0.0 && beta_hi > beta_lo) {
        return Err(Error::domain(format!("invalid inverse-temperature interval [{beta_lo}, {beta_hi}]")));
    }
    let samples: Vec<f64> = (0..=16)
        .map(|i| beta_lo * (beta_hi / beta_lo).powf(i as f64 / 16.0))
        .map(|b| rho_crit(disp, b))
        .collect::<Result<_>>()?;
    let increasing = samples.windows(2).all(|w| w[1] > w[0]);
    let decreasing = samples.windows(2).all(|w| w[1] < w[0]);
    if !increasing && !decreasing {
        return Err(Error::contract("critical density is not monotone on the search interval"));
    }
    let g = |b: f64| match rho_crit(disp, b) {
        Ok(v) => v - target,
        Err(_) => f64::NAN,
    };
    let opts = RootOptions { logarithmic: true, residual: 1e-14, ..RootOptions::default() };
    let root = solve_bracketed(g, beta_lo, beta_hi, opts)?;
    let residual = root.value.abs();
    if residual > CRITICAL_BAND {
        return Err(Error::NoConvergence(format!("critical temperature residual {residual:.3e}")));
    }
    Ok(CriticalTemperature { beta_c: root.x, temperature: 1.0 / root.x, residual })
}
