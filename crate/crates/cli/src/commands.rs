//! One runner per command. Each gates on the dispersion conditions, calls
//! into the core, and records tables, summary sections and operations.

use std::f64::consts::PI;

use clap::ValueEnum;
use num_complex::Complex64;
use phonon_bec::bec_states::{
    combined_limit_ladder, characteristic_limits, decomposition_check, e_fingerprint, fingerprint_probes, fingerprint_recover,
    gauge_shift_check, injectivity_rank, CondensatePhase, ElectronFactor, FreeBosonForms,
};
use phonon_bec::condensation::{classify_phase, condensate_sequence, critical_temperature, fit_inverse_size, Phase, PhaseReport};
use phonon_bec::decoupling::{
    boson_number_point, verify_dressing_identity, verify_factorization_batch, verify_spectral_equivalence, CoupledSystem,
};
use phonon_bec::fixtures::FixtureRng;
use phonon_bec::linalg::Matrix;
use phonon_bec::phonon_gas::{rho_crit, validate_dispersion};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::artifacts::{Artifacts, Table};
use crate::config::ExperimentConfig;
use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Condense,
    PhaseDiagram,
    DecoupleVerify,
    BecStates,
    Fingerprint,
    FullReport,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Condense => "condense",
            Command::PhaseDiagram => "phase-diagram",
            Command::DecoupleVerify => "decouple-verify",
            Command::BecStates => "bec-states",
            Command::Fingerprint => "fingerprint",
            Command::FullReport => "full-report",
        }
    }
}

fn core<T>(operation: &str, r: phonon_bec::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::from_core(operation, e))
}

fn to_json(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Runs `cmd`; verification failures are left in `Artifacts::failures`.
pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Artifacts, Failure> {
    let mut art = Artifacts::default();
    validate(cfg, &mut art)?;
    match cmd {
        Command::Validate => {}
        Command::Condense => condense(cfg, &mut art)?,
        Command::PhaseDiagram => phase_diagram(cfg, &mut art)?,
        Command::DecoupleVerify => decouple_verify(cfg, &mut art)?,
        Command::BecStates => bec_states(cfg, &mut art)?,
        Command::Fingerprint => fingerprint(cfg, &mut art, true)?,
        Command::FullReport => {
            condense(cfg, &mut art)?;
            phase_diagram(cfg, &mut art)?;
            decouple_verify(cfg, &mut art)?;
            bec_states(cfg, &mut art)?;
            fingerprint(cfg, &mut art, false)?;
        }
    }
    Ok(art)
}

/// Dispersion admissibility; a failing condition stops every command.
fn validate(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), Failure> {
    let beta = cfg.beta();
    let report = validate_dispersion(&cfg.dispersion, beta);
    let mut table = Table::new("validation.csv", &["condition", "passed", "witness", "detail"]);
    for c in &report.checks {
        table.push(vec![c.name.as_str().into(), c.passed.into(), c.witness.into(), c.detail.as_str().into()]);
    }
    art.tables.push(table);
    art.log("validate", "phonon_gas::validate_dispersion", &["validation.csv", "summary.validate"]);
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(Failure::Validation(format!("dispersion condition(s) violated: {}", failed.join(", "))));
    }
    cfg.hubbard_system()?;
    cfg.coupling_family()?;
    cfg.probe_function()?;
    art.section(
        "validate",
        json!({ "beta": beta, "temperature": 1.0 / beta, "all_passed": true, "checks": to_json(&report.checks) }),
    );
    Ok(())
}

fn condense(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), Failure> {
    let (beta, rho) = (cfg.beta(), cfg.density()?);
    let seq = core(
        "condensation::condensate_sequence",
        condensate_sequence(&cfg.dispersion, beta, rho, &cfg.sweep.box_sizes, cfg.thermodynamics.infrared_number),
    )?;
    let limit = seq.phase.condensate_density;
    let mut table = Table::new(
        "condensate.csv",
        &["box_size", "fugacity_excess", "residual", "N_b0_over_Ld", "infrared_density", "gap_to_limit"],
    );
    let gaps: Vec<f64> = seq.points.iter().map(|p| (p.zero_mode_density - limit).abs()).collect();
    for (p, g) in seq.points.iter().zip(&gaps) {
        table.push(vec![
            p.box_size.into(),
            p.fugacity_excess.into(),
            p.residual.into(),
            p.zero_mode_density.into(),
            p.infrared_density.into(),
            (*g).into(),
        ]);
    }
    art.tables.push(table);
    art.log("condense", "condensation::condensate_sequence", &["condensate.csv", "summary.condense"]);

    let tol = &cfg.tolerances;
    let max_residual = seq.points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    // Relative to the limit when condensed; absolute smallness otherwise.
    let scale = if limit > 0.0 { limit } else { rho };
    let last_relative = gaps.last().copied().unwrap_or(f64::NAN) / scale;
    let extrapolated_relative = seq.extrapolated.map(|a| (a - limit).abs() / scale);
    let checks = json!({
        "fugacity_residual": art.check("condense", "fugacity_residual", max_residual <= tol.fugacity_residual),
        "gap_monotone": art.check("condense", "gap_monotone", monotone),
        "extrapolated_within_tolerance": art.check(
            "condense",
            "extrapolated_within_tolerance",
            extrapolated_relative.is_none_or(|r| r <= tol.condensate_relative),
        ),
    });
    art.section(
        "condense",
        json!({
            "phase": to_json(&seq.phase),
            "limit_condensate_density": limit,
            "extrapolated": seq.extrapolated,
            "extrapolated_relative_gap": extrapolated_relative,
            "last_relative_gap": last_relative,
            "max_fugacity_residual": max_residual,
            "checks": checks,
        }),
    );
    Ok(())
}

fn phase_diagram(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), Failure> {
    let d = &cfg.dispersion;
    let rho = cfg.density()?;
    let sw = &cfg.sweep;
    let betas: Vec<f64> = (0..sw.beta_points)
        .map(|i| sw.beta_min * (sw.beta_max / sw.beta_min).powf(i as f64 / (sw.beta_points - 1) as f64))
        .collect();
    let rows: Vec<PhaseReport> = betas
        .par_iter()
        .map(|&b| core("condensation::classify_phase", classify_phase(d, b, rho)))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(
        "phase_diagram.csv",
        &["beta", "temperature", "rho_crit", "density", "phase", "y_infinity", "condensate_density"],
    );
    for r in &rows {
        let phase = match r.phase {
            Phase::Condensed => "condensed",
            Phase::Normal => "normal",
            Phase::Critical => "critical",
        };
        table.push(vec![
            r.beta.into(),
            (1.0 / r.beta).into(),
            r.rho_crit.into(),
            r.target_density.into(),
            phase.into(),
            r.y_infinity.into(),
            r.condensate_density.into(),
        ]);
    }
    art.tables.push(table);
    art.log("phase-diagram", "condensation::classify_phase", &["phase_diagram.csv"]);

    let lo = core("phonon_gas::rho_crit", rho_crit(d, sw.beta_min))?;
    let hi = core("phonon_gas::rho_crit", rho_crit(d, sw.beta_max))?;
    let critical = if (lo.min(hi)..=lo.max(hi)).contains(&rho) {
        let ct = core("condensation::critical_temperature", critical_temperature(d, rho, sw.beta_min, sw.beta_max))?;
        art.log("phase-diagram", "condensation::critical_temperature", &["summary.phase_diagram"]);
        to_json(&ct)
    } else {
        json!({ "note": "density outside the critical-density range of the sweep" })
    };
    art.section("phase_diagram", json!({ "density": rho, "critical_temperature": critical }));
    Ok(())
}

fn coupled_system(cfg: &ExperimentConfig) -> Result<CoupledSystem, Failure> {
    let h = &cfg.hubbard;
    let mut sys = core(
        "decoupling::CoupledSystem::from_lattice",
        CoupledSystem::from_lattice(cfg.hubbard_system()?, &cfg.coupling_family()?, &cfg.dispersion, h.box_size, &h.lattice_points),
    )?;
    sys.dimension_cap = h.dimension_cap;
    Ok(sys)
}

fn decouple_verify(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), Failure> {
    let sys = coupled_system(cfg)?;
    let ladder = &cfg.sweep.level_caps;
    let tol = &cfg.tolerances;

    let dressing = core("decoupling::verify_dressing_identity", verify_dressing_identity(&sys, ladder))?;
    let mut table = Table::new("dressing.csv", &["level_cap", "residual", "restricted_dim", "unitarity_defect"]);
    for p in &dressing.points {
        table.push(vec![p.level_cap.into(), p.residual.into(), p.restricted_dim.into(), p.unitarity_defect.into()]);
    }
    art.tables.push(table);
    art.log("decouple-verify", "decoupling::verify_dressing_identity", &["dressing.csv", "summary.decouple_verify"]);

    let mut rng = FixtureRng::new(cfg.seed);
    let pairs: Vec<(Matrix, Vec<Complex64>)> = (0..cfg.sweep.factorization_pairs)
        .map(|_| (rng.matrix(sys.hubbard.dim(), 1.0), rng.vector(sys.modes.len(), 0.5)))
        .collect();
    let factor = core("decoupling::verify_factorization_batch", verify_factorization_batch(&sys, ladder, &pairs))?;
    let mut table = Table::new(
        "factorization.csv",
        &["pair", "level_cap", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "gap"],
    );
    for (i, rep) in factor.iter().enumerate() {
        for p in &rep.points {
            table.push(vec![
                i.into(),
                p.level_cap.into(),
                p.lhs.re.into(),
                p.lhs.im.into(),
                p.rhs.re.into(),
                p.rhs.im.into(),
                p.gap.into(),
            ]);
        }
    }
    art.tables.push(table);
    art.log("decouple-verify", "decoupling::verify_factorization_batch", &["factorization.csv", "summary.decouple_verify"]);

    let spectral = core(
        "decoupling::verify_spectral_equivalence",
        verify_spectral_equivalence(&sys, ladder, cfg.sweep.spectral_levels),
    )?;
    let top = *ladder.last().expect("nonempty ladder");
    let number = core("decoupling::boson_number_point", boson_number_point(&sys, top))?;
    art.log("decouple-verify", "decoupling::verify_spectral_equivalence", &["summary.decouple_verify"]);
    art.log("decouple-verify", "decoupling::boson_number_point", &["summary.decouple_verify"]);

    let last_residual = dressing.points.last().map_or(f64::NAN, |p| p.residual);
    let worst_gap = factor.iter().filter_map(|r| r.points.last()).map(|p| p.gap).fold(0.0, f64::max);
    let factor_monotone = factor.iter().all(|r| r.monotone);
    let checks = json!({
        "dressing_monotone": art.check("decouple_verify", "dressing_monotone", dressing.monotone),
        "dressing_residual": art.check("decouple_verify", "dressing_residual", last_residual <= tol.dressing_residual),
        "factorization_monotone": art.check("decouple_verify", "factorization_monotone", factor_monotone),
        "factorization_gap": art.check("decouple_verify", "factorization_gap", worst_gap <= tol.factorization_gap),
    });
    art.section(
        "decouple_verify",
        json!({
            "alpha": sys.alpha(),
            "modes": sys.modes.len(),
            "level_caps": ladder,
            "dressing": to_json(&dressing),
            "factorization_max_gap_at_top": worst_gap,
            "spectral_max_gaps": spectral.points.iter().map(|p| p.max_gap).collect::<Vec<_>>(),
            "spectral_monotone": spectral.monotone,
            "boson_number": to_json(&number),
            "checks": checks,
        }),
    );
    Ok(())
}

fn bec_states(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<(), Failure> {
    let (d, beta, rho) = (&cfg.dispersion, cfg.beta(), cfg.density()?);
    let f = cfg.probe_function()?;
    let report = core("condensation::classify_phase", classify_phase(d, beta, rho))?;
    let forms = core("bec_states::FreeBosonForms", FreeBosonForms::new(d, beta))?;
    let rho0 = report.condensate_density;
    let q1 = core("bec_states::q1", forms.q1(&f))?;
    let q2 = core("bec_states::q2", forms.q2(&f, report.y_infinity))?;
    let q0 = if rho0 > 0.0 { core("bec_states::q0", forms.q0(&f, rho0))? } else { 0.0 };
    let psi = match report.phase {
        Phase::Normal => core("bec_states::psi_normal", forms.psi_normal(&f, report.y_infinity))?,
        _ => core("bec_states::psi_bec", forms.psi_bec(&f, rho0))?,
    };
    let stationarity = core(
        "bec_states::stationarity_check",
        forms.stationarity_check(&f, cfg.probe.stationarity_time, rho0),
    )?;
    art.log("bec-states", "bec_states::FreeBosonForms", &["summary.bec_states"]);
    let decomposition = if rho0 > 0.0 {
        let dp = core("bec_states::decomposition_check", decomposition_check(&forms, &f, rho0))?;
        art.log("bec-states", "bec_states::decomposition_check", &["summary.bec_states"]);
        Some(dp)
    } else {
        None
    };

    let boxes = &cfg.sweep.box_sizes;
    let (_, limits) = core("bec_states::characteristic_limits", characteristic_limits(d, beta, rho, &f, boxes))?;
    let mut table = Table::new(
        "characteristic_limits.csv",
        &["box_size", "fugacity_excess", "zero_mode", "nonzero", "q0", "nonzero_limit", "zero_mode_gap", "nonzero_gap"],
    );
    for p in &limits {
        table.push(vec![
            p.box_size.into(),
            p.fugacity_excess.into(),
            p.zero_mode.into(),
            p.nonzero.into(),
            p.q0.into(),
            p.nonzero_limit.into(),
            p.zero_mode_gap.into(),
            p.nonzero_gap.into(),
        ]);
    }
    art.tables.push(table);
    art.log("bec-states", "bec_states::characteristic_limits", &["characteristic_limits.csv"]);

    let hubbard = cfg.hubbard_system()?;
    let n = hubbard.dim();
    let electron = core(
        "bec_states::ElectronFactor",
        ElectronFactor::new(&hubbard, &cfg.coupling_family()?, d, &Matrix::identity(n, n), &f),
    )?;
    let combined = core("bec_states::combined_limit_ladder", combined_limit_ladder(&electron, d, beta, rho, &f, boxes))?;
    let mut table = Table::new("combined.csv", &["box_size", "fugacity_excess", "finite_re", "finite_im", "gap"]);
    for p in &combined.points {
        table.push(vec![p.box_size.into(), p.fugacity_excess.into(), p.finite.re.into(), p.finite.im.into(), p.gap.into()]);
    }
    art.tables.push(table);
    art.log("bec-states", "bec_states::combined_limit_ladder", &["combined.csv", "summary.bec_states"]);

    let tol = &cfg.tolerances;
    let zero_decreasing = rho0 == 0.0 || limits.windows(2).all(|w| w[1].zero_mode_gap <= w[0].zero_mode_gap);
    let nonzero_decreasing = limits.windows(2).all(|w| w[1].nonzero_gap <= w[0].nonzero_gap);
    let last = limits.last().expect("nonempty box ladder");
    // The zero mode converges like 1/L; judge its a + b/L intercept.
    let zero_extrapolated = (limits.len() >= 3).then(|| {
        let tail: Vec<(f64, f64)> = limits[limits.len() - 3..].iter().map(|p| (p.box_size, p.zero_mode)).collect();
        fit_inverse_size(&tail).0
    });
    let zero_relative = match zero_extrapolated {
        Some(a) if rho0 > 0.0 => (a - q0).abs() / q0,
        _ => last.zero_mode_relative_gap(),
    };
    let final_ok = (rho0 == 0.0 || zero_relative <= tol.characteristic_relative)
        && last.nonzero_relative_gap() <= tol.characteristic_relative;
    let checks = json!({
        "zero_mode_gap_decreasing": art.check("bec_states", "zero_mode_gap_decreasing", zero_decreasing),
        "nonzero_gap_decreasing": art.check("bec_states", "nonzero_gap_decreasing", nonzero_decreasing),
        "final_relative_gaps": art.check("bec_states", "final_relative_gaps", final_ok),
        "combined_monotone": art.check("bec_states", "combined_monotone", combined.monotone),
        "decomposition_gap": art.check(
            "bec_states",
            "decomposition_gap",
            decomposition.is_none_or(|p| p.gap <= tol.decomposition_gap),
        ),
    });
    art.section(
        "bec_states",
        json!({
            "phase": to_json(&report),
            "q0": q0,
            "q1": q1,
            "q2": q2,
            "psi": psi,
            "zero_mode_extrapolated": zero_extrapolated,
            "zero_mode_extrapolated_relative_gap": zero_relative,
            "zero_mode_last_relative_gap": last.zero_mode_relative_gap(),
            "nonzero_last_relative_gap": last.nonzero_relative_gap(),
            "stationarity": to_json(&stationarity),
            "decomposition": decomposition.map(|p| to_json(&p)),
            "electron_factor": to_json(&electron),
            "combined_limit": to_json(&combined.limit),
            "combined_gap_ratios": combined.gap_ratios,
            "checks": checks,
        }),
    );
    Ok(())
}

/// Gauge covariance, fingerprint round trips and injectivity on seeded
/// fibers. Needs a condensate; `required = false` records a skip instead.
fn fingerprint(cfg: &ExperimentConfig, art: &mut Artifacts, required: bool) -> Result<(), Failure> {
    let (d, beta, rho) = (&cfg.dispersion, cfg.beta(), cfg.density()?);
    let report = core("condensation::classify_phase", classify_phase(d, beta, rho))?;
    if report.condensate_density <= 0.0 {
        if required {
            return Err(Failure::Validation(format!(
                "fingerprint needs a condensate; density {rho} is not above the critical density {}",
                report.rho_crit
            )));
        }
        art.section("fingerprint", json!({ "skipped": "no condensate at this density" }));
        return Ok(());
    }
    let forms = core("bec_states::FreeBosonForms", FreeBosonForms::new(d, beta))?;
    let base = core("bec_states::CondensatePhase", CondensatePhase::new(0.0, 0.0, report.condensate_density, d))?;
    let (f1, f2) = core("bec_states::fingerprint_probes", fingerprint_probes(d, base.amplitude, cfg.probe.fingerprint_width))?;
    let mut rng = FixtureRng::new(cfg.seed ^ 0xf1);
    let pr = &cfg.probe;
    let mut table = Table::new(
        "fingerprint.csv",
        &["case", "r", "theta", "gauge_shift", "gauge_gap", "recovered_r", "recovered_theta", "round_trip_error"],
    );
    let (mut gauge, mut round) = (0.0f64, 0.0f64);
    let mut atoms = Vec::with_capacity(pr.fiber_cases);
    for i in 0..pr.fiber_cases {
        let f = rng.test_function(d.dim, 1, 1.5);
        let (r, theta) = rng.fiber_label(pr.fiber_sqrt_r_max);
        let shift = rng.uniform(-2.0 * PI, 2.0 * PI);
        let phase = core("bec_states::CondensatePhase", base.with_label(r, theta))?;
        let gap = core("bec_states::gauge_shift_check", gauge_shift_check(&forms, &phase, &f, shift))?;
        let e1 = core("bec_states::e_fingerprint", e_fingerprint(&phase, &f1))?;
        let e2 = core("bec_states::e_fingerprint", e_fingerprint(&phase, &f2))?;
        let rec = core("bec_states::fingerprint_recover", fingerprint_recover(e1, e2))?;
        let dtheta = rec.theta.map_or(f64::INFINITY, |t| ((t - theta + PI).rem_euclid(2.0 * PI) - PI).abs());
        let err = (rec.r - r).abs().max(dtheta);
        gauge = gauge.max(gap);
        round = round.max(err);
        atoms.push((r, theta));
        table.push(vec![
            i.into(),
            r.into(),
            theta.into(),
            shift.into(),
            gap.into(),
            rec.r.into(),
            rec.theta.unwrap_or(f64::NAN).into(),
            err.into(),
        ]);
    }
    art.tables.push(table);
    art.log("fingerprint", "bec_states::gauge_shift_check", &["fingerprint.csv"]);
    art.log("fingerprint", "bec_states::fingerprint_recover", &["fingerprint.csv"]);

    // Injectivity on a few atoms; the grid must outnumber them.
    let atoms: Vec<(f64, f64)> = atoms.into_iter().take(8).collect();
    let grid: Vec<(f64, f64)> = (0..6).flat_map(|i| (0..6).map(move |j| (i as f64 * 0.7, j as f64 * 0.7))).collect();
    let injectivity = if atoms.is_empty() {
        None
    } else {
        let rep = core("bec_states::injectivity_rank", injectivity_rank(&atoms, &grid))?;
        art.log("fingerprint", "bec_states::injectivity_rank", &["summary.fingerprint"]);
        Some(rep)
    };
    let tol = &cfg.tolerances;
    let checks = json!({
        "gauge_gap": art.check("fingerprint", "gauge_gap", gauge <= tol.gauge_gap),
        "round_trip": art.check("fingerprint", "round_trip", round <= tol.round_trip),
        "injective": art.check("fingerprint", "injective", injectivity.as_ref().is_none_or(|r| r.full_rank())),
    });
    art.section(
        "fingerprint",
        json!({
            "condensate_density": report.condensate_density,
            "cases": pr.fiber_cases,
            "max_gauge_gap": gauge,
            "max_round_trip_error": round,
            "injectivity": injectivity.map(|r| to_json(&r)),
            "checks": checks,
        }),
    );
    Ok(())
}
