//! One-particle reduced density matrix of the N-Harmonium ground state.

pub mod kernel;
pub mod matrix;
pub mod moments;
pub mod quadrature;

use thiserror::Error;

pub use kernel::{bosonic_kernel, marginal_kernel, KernelPolynomial};
pub use matrix::{matrix_elements, RdmMatrix, SymBand};
pub use quadrature::quadrature_oracle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RdmError {
    #[error("particle number must be at least 2, got {0}")]
    TooFewParticles(usize),
    #[error("the eliminated quadratic form is not positive definite")]
    Indefinite,
    #[error("matrix dimension {dim} cannot hold bandwidth {bandwidth}")]
    DimensionTooSmall { dim: usize, bandwidth: usize },
    #[error("kernel is for N = {kernel} but parameters are for N = {params}")]
    ParticleMismatch { kernel: usize, params: usize },
    #[error("quadrature for element ({k},{n}) did not converge")]
    QuadratureNotConverged { k: usize, n: usize },
}
