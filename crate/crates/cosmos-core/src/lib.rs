//! Matrix-optimizer laboratory: deterministic dense linear-algebra kernels,
//! low-rank eigensubspace tracking, the COSMOS optimizer family (Adam,
//! MUON, one-sided SOAP, one- and two-sided COSMOS), desk-scale test
//! problems, and exact memory accounting of optimizer states.
//!
//! All numerical kernels are generic over the scalar type via
//! [`scalar::Scalar`]; the `f64` aliases below are the production types.

pub mod accountant;
pub mod linalg;
pub mod matrix;
pub mod optim;
pub mod params;
pub mod problems;
pub mod rng;
pub mod scalar;
pub mod subspace;

use thiserror::Error;

/// Default 64-bit dense matrix.
pub type Mat64 = matrix::DenseMatrix<f64>;
/// Single-precision variant for size/throughput experiments.
pub type Mat32 = matrix::DenseMatrix<f32>;
/// Default tracker state.
pub type Tracker64 = subspace::TrackerState<f64>;
/// Default optimizer configuration.
pub type OptimizerConfig64 = optim::OptimizerConfig<f64>;

/// Errors raised by kernel and optimizer operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// Operand shapes are inconsistent.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// A documented operation precondition was violated.
    #[error("precondition violation: {0}")]
    Precondition(String),
    /// The input is outside the operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
