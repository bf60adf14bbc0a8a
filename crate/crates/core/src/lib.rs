//! Numerical engine for generalised Ruijsenaars-Schneider integrable systems
//! built from representations of framed cyclic and tadpole quivers.
//!
//! The crate provides:
//! - dense complex linear algebra ([`linalg`]),
//! - quiver representation data and multiplicative moment-map checks
//!   ([`quiver`]),
//! - the log-canonical Darboux charts and the action-angle dual chart
//!   ([`darboux`]),
//! - the commuting Hamiltonian families in matrix and coordinate form
//!   ([`hamiltonians`]),
//! - closed-form integration of the flows ([`flows`]),
//! - a finite-difference Poisson bracket engine for the chart
//!   ([`poisson`]),
//! - q-difference operators quantising the Hamiltonians ([`quantum`]).

pub mod darboux;
pub mod error;
pub mod flows;
pub mod hamiltonians;
pub mod linalg;
pub mod poisson;
pub mod quantum;
pub mod quiver;
pub mod sampling;
pub mod serialize;

pub use error::{Error, Result};
pub use linalg::{CMatrix, Tolerance, C64};
