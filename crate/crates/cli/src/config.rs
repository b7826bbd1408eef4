//! Experiment configuration: a single JSON document layered over defaults,
//! then patched by `KEY=VALUE` overrides on dotted paths.

use std::path::Path;

use num_complex::Complex64;
use phonon_bec::fixtures::{CoupledFixture, DEFAULT_SEED};
use phonon_bec::hubbard::{CouplingFamily, HubbardSystem};
use phonon_bec::linalg::{FermionSector, Matrix};
use phonon_bec::phonon_gas::{rho_crit, Dispersion};
use phonon_bec::test_function::TestFunction;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

/// Keys that exclude each other inside one section; setting one clears the rest.
const EXCLUSIVE: &[(&str, &[&str])] = &[
    ("thermodynamics", &["beta", "temperature"]),
    ("thermodynamics", &["density", "density_over_critical"]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dispersion: Dispersion,
    pub hubbard: HubbardSpec,
    pub thermodynamics: Thermodynamics,
    pub sweep: SweepSpec,
    pub probe: ProbeSpec,
    pub tolerances: Tolerances,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubbardSpec {
    pub num_sites: usize,
    pub num_electrons: usize,
    /// Real symmetric hopping matrix, row by row.
    pub hopping: Vec<Vec<f64>>,
    pub repulsion: f64,
    /// Electron-phonon coupling `alpha`.
    pub coupling: f64,
    /// Infrared cutoff `kappa`.
    pub cutoff: f64,
    pub uv_width: f64,
    /// Box side fixing the momenta of the discrete modes.
    pub box_size: f64,
    /// Integer lattice points `n_j` of the coupled modes `k_j = 2 pi n_j / L`.
    pub lattice_points: Vec<Vec<i64>>,
    pub dimension_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thermodynamics {
    pub beta: Option<f64>,
    pub temperature: Option<f64>,
    pub density: Option<f64>,
    /// Density as a multiple of the critical density at the configured `beta`.
    pub density_over_critical: Option<f64>,
    /// Phonons bound by the electrons, `N_ir`, added to the fugacity equation.
    pub infrared_number: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub box_sizes: Vec<f64>,
    pub level_caps: Vec<usize>,
    pub factorization_pairs: usize,
    pub spectral_levels: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub center: Vec<f64>,
    pub width: f64,
    /// `[re, im]`.
    pub amplitude: [f64; 2],
    pub stationarity_time: f64,
    pub fiber_cases: usize,
    pub fiber_sqrt_r_max: f64,
    pub fingerprint_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub fugacity_residual: f64,
    pub dressing_residual: f64,
    pub factorization_gap: f64,
    pub condensate_relative: f64,
    pub characteristic_relative: f64,
    pub decomposition_gap: f64,
    pub gauge_gap: f64,
    pub round_trip: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub directory: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let fx = CoupledFixture::default();
        let n = fx.num_sites;
        let hopping = (0..n).map(|i| (0..n).map(|j| if i == j { fx.hopping_diagonal[i] } else { 0.0 }).collect()).collect();
        Self {
            seed: DEFAULT_SEED,
            dispersion: Dispersion::default_massive(),
            hubbard: HubbardSpec {
                num_sites: n,
                num_electrons: fx.num_electrons,
                hopping,
                repulsion: fx.repulsion,
                coupling: fx.alpha,
                cutoff: fx.cutoff,
                uv_width: fx.uv_width,
                box_size: fx.box_size,
                lattice_points: fx.lattice_points,
                dimension_cap: phonon_bec::decoupling::DEFAULT_DIMENSION_CAP,
            },
            thermodynamics: Thermodynamics {
                beta: Some(fx.beta),
                temperature: None,
                density: None,
                density_over_critical: Some(2.0),
                infrared_number: 0.0,
            },
            sweep: SweepSpec {
                box_sizes: vec![10.0, 20.0, 40.0, 80.0],
                level_caps: vec![6, 9, 12],
                factorization_pairs: 5,
                spectral_levels: 6,
                beta_min: 0.25,
                beta_max: 4.0,
                beta_points: 17,
            },
            probe: ProbeSpec {
                center: vec![1.5, 0.0, 0.0],
                width: 0.4,
                amplitude: [1.0, 0.0],
                stationarity_time: 1.0,
                fiber_cases: 100,
                fiber_sqrt_r_max: 3.0,
                fingerprint_width: 0.5,
            },
            tolerances: Tolerances {
                fugacity_residual: phonon_bec::condensation::FUGACITY_RESIDUAL,
                dressing_residual: 1e-3,
                factorization_gap: 1e-3,
                condensate_relative: 0.05,
                characteristic_relative: 1e-2,
                decomposition_gap: 1e-6,
                gauge_gap: 1e-12,
                round_trip: 1e-9,
            },
            output: OutputSpec::default(),
        }
    }
}

fn merge(base: &mut Value, patch: Value, section: Option<&str>) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            if let Some(sec) = section {
                clear_exclusive(b, sec, p.keys().map(String::as_str));
            }
            for (k, v) in p {
                let child = if section.is_none() { Some(k.as_str()) } else { None };
                match b.get_mut(&k) {
                    Some(slot) if v.is_object() => merge(slot, v, child),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn clear_exclusive<'a>(obj: &mut serde_json::Map<String, Value>, section: &str, keys: impl Iterator<Item = &'a str> + Clone) {
    for (sec, group) in EXCLUSIVE {
        if *sec != section {
            continue;
        }
        let given: Vec<&str> = keys.clone().filter(|k| group.contains(k)).collect();
        if given.is_empty() {
            continue;
        }
        for other in group.iter().filter(|k| !given.contains(k)) {
            obj.insert((*other).to_string(), Value::Null);
        }
    }
}

fn apply_override(root: &mut Value, spec: &str) -> Result<(), Failure> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Failure::Validation(format!("override `{spec}` is not KEY=VALUE")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    let (last, parents) = keys.split_last().filter(|(l, _)| !l.is_empty()).ok_or_else(|| Failure::Validation(format!("empty override key in `{spec}`")))?;
    let mut node = root;
    for key in parents {
        node = node
            .get_mut(*key)
            .filter(|v| v.is_object())
            .ok_or_else(|| Failure::Validation(format!("override path `{path}` has no section `{key}`")))?;
    }
    let obj = node.as_object_mut().ok_or_else(|| Failure::Validation(format!("override path `{path}` is not inside an object")))?;
    if !obj.contains_key(*last) {
        return Err(Failure::Validation(format!("override path `{path}` names an unknown key")));
    }
    if parents.len() == 1 {
        clear_exclusive(obj, parents[0], std::iter::once(*last));
    }
    obj.insert((*last).to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    /// Defaults, then the file at `path` (if any), then each override in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, Failure> {
        let mut root = serde_json::to_value(Self::default()).expect("default config serializes");
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Validation(format!("cannot read config {}: {e}", p.display())))?;
            let file: Value = serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("config {} is not JSON: {e}", p.display())))?;
            if !file.is_object() {
                return Err(Failure::Validation("config must be a JSON object".into()));
            }
            if let Some(t) = file.get("thermodynamics") {
                if t.get("beta").is_some_and(|v| !v.is_null()) && t.get("temperature").is_some_and(|v| !v.is_null()) {
                    return Err(Failure::Validation("give exactly one of thermodynamics.beta and thermodynamics.temperature".into()));
                }
            }
            merge(&mut root, file, None);
        }
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        let cfg: Self = serde_json::from_value(root).map_err(|e| Failure::Validation(format!("invalid config: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Structural checks; the dispersion conditions are gated separately.
    pub fn check(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::Validation(m));
        let th = &self.thermodynamics;
        match (th.beta, th.temperature) {
            (Some(_), Some(_)) | (None, None) => return bad("give exactly one of thermodynamics.beta and thermodynamics.temperature".into()),
            _ => {}
        }
        if !(self.beta() > 0.0 && self.beta().is_finite()) {
            return bad(format!("inverse temperature must be positive and finite, got {}", self.beta()));
        }
        match (th.density, th.density_over_critical) {
            (Some(x), None) | (None, Some(x)) if x > 0.0 && x.is_finite() => {}
            _ => return bad("give exactly one positive thermodynamics.density or thermodynamics.density_over_critical".into()),
        }
        if !(th.infrared_number >= 0.0) {
            return bad("thermodynamics.infrared_number must be nonnegative".into());
        }
        self.dispersion.check().map_err(|e| Failure::Validation(format!("dispersion: {e}")))?;
        let sw = &self.sweep;
        if sw.box_sizes.is_empty() || sw.box_sizes[0] <= 0.0 || sw.box_sizes.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("sweep.box_sizes must be positive and strictly increasing".into());
        }
        if sw.level_caps.is_empty() || sw.level_caps[0] == 0 || sw.level_caps.windows(2).any(|w| w[1] <= w[0]) {
            return bad("sweep.level_caps must be positive and strictly increasing".into());
        }
        if !(sw.beta_min > 0.0 && sw.beta_max > sw.beta_min) || sw.beta_points < 2 {
            return bad("sweep needs 0 < beta_min < beta_max and at least two beta_points".into());
        }
        let h = &self.hubbard;
        if h.hopping.len() != h.num_sites || h.hopping.iter().any(|row| row.len() != h.num_sites) {
            return bad(format!("hubbard.hopping must be {0} x {0}", h.num_sites));
        }
        for i in 0..h.num_sites {
            for j in 0..i {
                if h.hopping[i][j] != h.hopping[j][i] {
                    return bad(format!("hubbard.hopping is not symmetric at ({i}, {j})"));
                }
            }
        }
        if h.lattice_points.iter().any(|n| n.len() != self.dispersion.dim) {
            return bad(format!("hubbard.lattice_points must have {} coordinates", self.dispersion.dim));
        }
        if self.probe.center.len() != self.dispersion.dim {
            return bad(format!("probe.center must have {} coordinates", self.dispersion.dim));
        }
        Ok(())
    }

    /// `beta`, or `1 / T` when the temperature is given.
    pub fn beta(&self) -> f64 {
        self.thermodynamics.beta.unwrap_or_else(|| 1.0 / self.thermodynamics.temperature.unwrap_or(f64::NAN))
    }

    pub fn density(&self) -> Result<f64, Failure> {
        match self.thermodynamics.density {
            Some(rho) => Ok(rho),
            None => {
                let rc = rho_crit(&self.dispersion, self.beta()).map_err(|e| Failure::from_core("phonon_gas::rho_crit", e))?;
                Ok(rc * self.thermodynamics.density_over_critical.unwrap_or(f64::NAN))
            }
        }
    }

    pub fn hubbard_system(&self) -> Result<HubbardSystem, Failure> {
        let h = &self.hubbard;
        let sector = FermionSector::new(h.num_sites, h.num_electrons).map_err(|e| Failure::from_core("linalg::FermionSector", e))?;
        let hop = Matrix::from_fn(h.num_sites, h.num_sites, |i, j| Complex64::new(h.hopping[i][j], 0.0));
        HubbardSystem::new(sector, hop, h.repulsion, h.coupling, self.beta()).map_err(|e| Failure::from_core("hubbard::HubbardSystem", e))
    }

    pub fn coupling_family(&self) -> Result<CouplingFamily, Failure> {
        let h = &self.hubbard;
        CouplingFamily::on_chain(h.num_sites, self.dispersion.dim, h.uv_width, h.cutoff)
            .map_err(|e| Failure::from_core("hubbard::CouplingFamily", e))
    }

    pub fn probe_function(&self) -> Result<TestFunction, Failure> {
        let p = &self.probe;
        TestFunction::gaussian(p.center.clone(), p.width, Complex64::new(p.amplitude[0], p.amplitude[1]))
            .map_err(|e| Failure::from_core("test_function::TestFunction", e))
    }

    /// Hex SHA-256 of the resolved configuration's canonical JSON.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = ExperimentConfig::load(None, &[]).unwrap();
        assert_eq!(c.beta(), 1.0);
        assert_eq!(c.hubbard_system().unwrap().dim(), 6);
    }

    #[test]
    fn temperature_override_replaces_beta() {
        let c = ExperimentConfig::load(None, &["thermodynamics.temperature=0.5".into()]).unwrap();
        assert_eq!(c.thermodynamics.beta, None);
        assert_eq!(c.beta(), 2.0);
    }

    #[test]
    fn overrides_parse_json_values() {
        let c = ExperimentConfig::load(None, &["sweep.box_sizes=[5,10]".into(), "seed=7".into()]).unwrap();
        assert_eq!(c.sweep.box_sizes, vec![5.0, 10.0]);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::load(None, &["sweep.nope=1".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["nope.x=1".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["seed".into()]).is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.seed += 1;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn density_resolution() {
        let c = ExperimentConfig::default();
        let rc = rho_crit(&c.dispersion, 1.0).unwrap();
        assert!((c.density().unwrap() - 2.0 * rc).abs() < 1e-15);
        let c = ExperimentConfig::load(None, &["thermodynamics.density=0.3".into()]).unwrap();
        assert_eq!(c.thermodynamics.density_over_critical, None);
        assert_eq!(c.density().unwrap(), 0.3);
    }
}
