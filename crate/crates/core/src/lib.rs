//! Dispersive opto-mechanical coupling between a probe laser and a
//! rare-earth-ion-doped crystal cantilever prepared by a functionalized
//! spectral-hole-burning protocol.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`] holds the physical parameters and the derived mechanical
//!   and spectroscopic constants.
//! * [`holeburn`] describes the two-step burn and the resulting
//!   position-dependent hole edges.
//! * [`coupling`] computes the interaction energy `V(X)` three ways (direct
//!   quadrature, first-order closed form, low-temperature limit) together
//!   with the static displacement and the optical phase.
//! * [`bloch`] solves the two-level coherence dynamics under a modulated
//!   detuning.
//! * [`observables`] turns the above into detection and noise budgets.
//! * [`cli`] reads flat `key = value` scenario files and writes reports.
//!
//! Units are SI. Detunings are in Hz everywhere except [`bloch`], which
//! works in rad/s; [`bloch::hz_to_rad_per_s`] is the single bridge.

pub mod bloch;
pub mod cli;
pub mod constants;
pub mod coupling;
pub mod error;
pub mod holeburn;
pub mod model;
pub mod observables;
pub mod quadrature;
pub mod tolerances;

pub use error::{Error, Result};
