//! Numerical core of pin-lab: generalized Pauli constraint catalogs, the
//! N-Harmonium one-body density matrix, its spectrum, and the pinning
//! analysis built on top.

pub mod band;
pub mod catalog;
pub mod harmonium;
pub mod polytope;
pub mod precision;
pub mod rdm;
pub mod real;
pub mod spectrum;
pub mod weakfit;

pub use precision::Precision;
pub use real::{Mp, Real};
