//! Dense linear algebra, special functions and quadrature.

mod eig;
mod expm;
mod faddeeva;
mod lu;
mod matrix;
pub mod quadrature;
mod scalar;

pub use eig::{eig_real_nonsymmetric, EigenDecomposition};
pub use expm::expm;
pub use faddeeva::faddeeva;
pub use lu::{lu_solve, Lu};
pub use matrix::{CMatrix, Matrix, RMatrix};
pub use quadrature::{integrate_adaptive, Estimate};
pub use scalar::{c, Real, Scalar};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("singular matrix: pivot {pivot:e} at column {column}")]
    SingularMatrix { column: usize, pivot: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("eigenvector basis is ill-conditioned (reconstruction residual {residual:e})")]
    IllConditioned { residual: f64 },
    #[error("quadrature tolerance not met: estimate error {error:e} exceeds {tolerance:e} after {intervals} intervals")]
    ToleranceNotMet {
        value: Vec<num_complex::Complex64>,
        error: f64,
        tolerance: f64,
        intervals: usize,
    },
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
}
