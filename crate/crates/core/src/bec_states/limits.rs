//! Finite-box characteristic functionals and their infinite-volume limits,
//! alone and multiplied by the dressed electron factor.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FreeBosonForms;
use crate::condensation::{classify_phase, solve_fugacity_on, Phase, PhaseReport};
use crate::error::Result;
use crate::hubbard::{phase_weights, CouplingFamily, HubbardSystem, OverlapMatrix, EFFECTIVE_POWER, INFRARED_POWER};
use crate::linalg::Matrix;
use crate::phonon_gas::{finite_volume_characteristic, Dispersion, FugacityExcess, LatticeModes};
use crate::test_function::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicLimitPoint {
    pub box_size: f64,
    pub fugacity_excess: f64,
    /// Zero-mode part `I_L^(1)`.
    pub zero_mode: f64,
    /// Remaining lattice sum `I_L^(2)`.
    pub nonzero: f64,
    /// `q0(f)` (zero outside the condensed phase).
    pub q0: f64,
    /// `q1(f)` when condensed or critical, `q2(f)` when normal.
    pub nonzero_limit: f64,
    pub zero_mode_gap: f64,
    pub nonzero_gap: f64,
}

impl CharacteristicLimitPoint {
    pub fn zero_mode_relative_gap(&self) -> f64 {
        self.zero_mode_gap / self.q0.abs().max(f64::MIN_POSITIVE)
    }

    pub fn nonzero_relative_gap(&self) -> f64 {
        self.nonzero_gap / self.nonzero_limit.abs().max(f64::MIN_POSITIVE)
    }
}

fn finite_point(
    disp: &Dispersion,
    beta: f64,
    target: f64,
    infrared_number: f64,
    f: &TestFunction,
    box_size: f64,
) -> Result<(f64, crate::phonon_gas::FiniteVolumeCharacteristic)> {
    let modes = LatticeModes::new(disp, box_size, beta)?;
    let sol = solve_fugacity_on(&modes, disp, target, infrared_number)?;
    let fvc = finite_volume_characteristic(&modes, disp, f, FugacityExcess(sol.fugacity_excess))?;
    Ok((sol.fugacity_excess, fvc))
}

/// Splits the finite-box quadratic form into zero-mode and remaining parts and
/// compares each with its limit along `box_sizes`.
pub fn characteristic_limits(
    disp: &Dispersion,
    beta: f64,
    target: f64,
    f: &TestFunction,
    box_sizes: &[f64],
) -> Result<(PhaseReport, Vec<CharacteristicLimitPoint>)> {
    let report = classify_phase(disp, beta, target)?;
    let forms = FreeBosonForms::new(disp, beta)?;
    let q0 = forms.q0(f, report.condensate_density)?;
    let nonzero_limit = forms.q2(f, report.y_infinity)?;
    let points = box_sizes
        .par_iter()
        .map(|&l| {
            let (u, fvc) = finite_point(disp, beta, target, 0.0, f, l)?;
            Ok(CharacteristicLimitPoint {
                box_size: l,
                fugacity_excess: u,
                zero_mode: fvc.zero_mode,
                nonzero: fvc.nonzero,
                q0,
                nonzero_limit,
                zero_mode_gap: (fvc.zero_mode - q0).abs(),
                nonzero_gap: (fvc.nonzero - nonzero_limit).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((report, points))
}

/// `psi~_e(e^{-i alpha n~(f)} A_e)` in the effective electron Gibbs state,
/// together with the phonon number the electrons bind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectronFactor {
    pub value: Complex64,
    /// `N_i (alpha^2 / 2) psi~_e(R_{-1})`.
    pub infrared_number: f64,
}

impl ElectronFactor {
    pub fn new(
        hubbard: &HubbardSystem,
        family: &CouplingFamily,
        disp: &Dispersion,
        a: &Matrix,
        f: &TestFunction,
    ) -> Result<Self> {
        let overlaps = OverlapMatrix::continuum(family, disp, EFFECTIVE_POWER)?;
        let state = hubbard.electron_state(&overlaps)?;
        let weights = phase_weights(family, disp, &f.scaled(Complex64::new(-1.0, 0.0)))?;
        let value = state.dressed_phase_expectation(a, &weights)?;
        let infrared_number = if hubbard.coupling() == 0.0 {
            0.0
        } else {
            let r1 = OverlapMatrix::continuum(family, disp, INFRARED_POWER)?;
            state.infrared_number(&r1, disp.internal_components)?
        };
        Ok(Self { value, infrared_number })
    }

    /// Factor for `A_e = 1`, `f = 0`, no electron-bound phonons.
    pub fn trivial() -> Self {
        Self { value: Complex64::new(1.0, 0.0), infrared_number: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedPoint {
    pub box_size: f64,
    pub fugacity_excess: f64,
    pub finite: Complex64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedReport {
    pub phase: Phase,
    pub y_infinity: f64,
    pub limit: Complex64,
    pub points: Vec<CombinedPoint>,
    pub monotone: bool,
    /// `gap(L_{i+1}) / gap(L_i)` along the ladder.
    pub gap_ratios: Vec<f64>,
}

/// Finite-box products `psi~_e(...) exp(-I_L / 4)` against the regime's limit
/// `psi~_e(...) psi_BEC(W(f))` or `psi~_e(...) exp(-q2(f) / 4)`.
pub fn combined_limit_ladder(
    electron: &ElectronFactor,
    disp: &Dispersion,
    beta: f64,
    target: f64,
    f: &TestFunction,
    box_sizes: &[f64],
) -> Result<CombinedReport> {
    let report = classify_phase(disp, beta, target)?;
    let forms = FreeBosonForms::new(disp, beta)?;
    let boson = match report.phase {
        Phase::Normal => forms.psi_normal(f, report.y_infinity)?,
        Phase::Condensed | Phase::Critical => forms.psi_bec(f, report.condensate_density)?,
    };
    let limit = electron.value * boson;
    let points = box_sizes
        .par_iter()
        .map(|&l| {
            let (u, fvc) = finite_point(disp, beta, target, electron.infrared_number, f, l)?;
            let finite = electron.value * fvc.weyl;
            Ok(CombinedPoint { box_size: l, fugacity_excess: u, finite, gap: (finite - limit).norm() })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = points.iter().map(|p| p.gap).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let gap_ratios = gaps.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(CombinedReport { phase: report.phase, y_infinity: report.y_infinity, limit, points, monotone, gap_ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::FermionSector;
    use crate::phonon_gas::rho_crit;

    fn bump() -> TestFunction {
        TestFunction::gaussian(vec![1.5, 0.0, 0.0], 0.4, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn condensed_limits_converge() {
        let d = Dispersion::default_massive();
        let (report, pts) = characteristic_limits(&d, 1.0, 1.0, &bump(), &[10.0, 20.0, 40.0]).unwrap();
        assert_eq!(report.phase, Phase::Condensed);
        for w in pts.windows(2) {
            assert!(w[1].zero_mode_gap < w[0].zero_mode_gap);
            assert!(w[1].nonzero_gap < w[0].nonzero_gap);
        }
        let last = pts.last().unwrap();
        assert!(last.zero_mode_relative_gap() <= 1e-2 && last.nonzero_relative_gap() <= 1e-2, "{last:?}");
    }

    #[test]
    fn normal_limit_uses_q2() {
        let d = Dispersion::default_massive();
        let target = 0.5 * rho_crit(&d, 1.0).unwrap();
        let (report, pts) = characteristic_limits(&d, 1.0, target, &bump(), &[10.0, 20.0]).unwrap();
        assert_eq!(report.phase, Phase::Normal);
        assert!(report.y_infinity > 1.0);
        assert_eq!(pts[0].q0, 0.0);
        assert!(pts[1].nonzero_relative_gap() < 1e-2);
    }

    #[test]
    fn trivial_inputs_give_one() {
        let d = Dispersion::default_massive();
        let rep = combined_limit_ladder(&ElectronFactor::trivial(), &d, 1.0, 1.0, &TestFunction::zero(3, 1), &[10.0, 20.0])
            .unwrap();
        for p in &rep.points {
            assert_eq!(p.finite, Complex64::new(1.0, 0.0));
            assert_eq!(p.gap, 0.0);
        }
    }

    #[test]
    fn supercritical_product_converges() {
        let d = Dispersion::default_massive();
        let hub = HubbardSystem::new(FermionSector::new(2, 2).unwrap(), Matrix::zeros(2, 2), 2.0, 0.3, 1.0).unwrap();
        let family = CouplingFamily::on_chain(2, 3, 2.0, 0.5).unwrap();
        let f = bump();
        let e = ElectronFactor::new(&hub, &family, &d, &Matrix::identity(6, 6), &f).unwrap();
        assert!(e.value.norm() <= 1.0 + 1e-12 && e.infrared_number > 0.0);
        let rep = combined_limit_ladder(&e, &d, 1.0, 1.0, &f, &[10.0, 20.0, 40.0]).unwrap();
        assert!(rep.monotone, "{rep:?}");
        assert!(rep.points[2].gap < rep.points[0].gap);
    }
}
