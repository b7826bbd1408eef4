//! Free phonon gas: dispersion admissibility, finite-box mode sums, continuum
//! densities, and finite-volume characteristic functionals.

mod characteristic;
mod density;
mod dispersion;
mod lattice;

pub use characteristic::{finite_volume_characteristic, FiniteVolumeCharacteristic};
pub use density::{
    axial_density_bound, bose_factor, bose_integral, boson_number_finite, rho_crit, rho_fr, BosonNumber,
    FugacityExcess,
};
pub use dispersion::{
    validate_dispersion, ConditionCheck, Dispersion, RadialProfile, RadialTable, ValidationReport, CHECK_DECAY,
    CHECK_GAP, CHECK_GROWTH_EXPONENT, CHECK_INFRARED, CHECK_MONOTONE, CHECK_UNBOUNDED,
};
pub use lattice::{lattice_points_in_box, spacing, LatticeModes, Shell, TRUNCATION_EPS};

/// Euclidean norm of a momentum vector.
pub fn momentum_norm(k: &[f64]) -> f64 {
    dispersion::norm(k)
}
