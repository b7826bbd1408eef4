//! Desk-scale numerics for a finite Hubbard system coupled to a free phonon
//! gas: exact diagonalization on truncated Fock spaces, the unitary dressing
//! that decouples electrons from phonons, phonon Bose–Einstein condensation
//! in finite boxes and its thermodynamic limit, and the decomposition of the
//! condensed state into gauge-breaking fibers.

pub mod bec_states;
pub mod condensation;
pub mod decoupling;
pub mod error;
pub mod fixtures;
pub mod hubbard;
pub mod linalg;
pub mod phonon_gas;
pub mod quadrature;
pub mod roots;
pub mod special;
pub mod test_function;

pub use error::{Error, Result};
