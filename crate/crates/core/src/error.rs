//! Crate-wide error type.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("order must be at least 1")]
    InvalidOrder,

    #[error("residue {residue} out of range for order {order} (expected 0..{order})")]
    InvalidResidue { residue: usize, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient table has order {table}, expected {expected}")]
    OrderMismatch { table: usize, expected: usize },

    #[error("initial-condition system for order {order} is numerically singular")]
    DegenerateSystem { order: usize },

    #[error(
        "series did not converge within {terms} terms \
         (|last term| = {last_term:.3e}, partial sum = {partial})"
    )]
    NonConvergence {
        terms: usize,
        last_term: f64,
        partial: Complex64,
    },

    #[error(
        "matrix series did not converge within {terms} terms \
         (term max-norm {last_term:.3e}, partial-sum max-norm {partial_norm:.3e})"
    )]
    MatrixNonConvergence {
        terms: usize,
        last_term: f64,
        partial_norm: f64,
    },

    #[error(
        "propagator branch {branch} overflows: exponent real part {exponent:.4e} \
         exceeds the f64 range"
    )]
    Overflow { branch: usize, exponent: f64 },

    #[error(
        "eigenvector condition estimate {condition:.3e} exceeds {limit:.1e}; \
         use the series path instead"
    )]
    IllConditioned { condition: f64, limit: f64 },

    #[error("closed-form kernel is singular at g = 0 for residue {residue}")]
    ClosedFormSingular { residue: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "time {t} precedes t0 = {t0}; backward evaluation must be requested explicitly"
    )]
    BackwardTime { t: f64, t0: f64 },

    #[error(
        "initial profile for residue {residue} has nonzero mean (|mode 0| = {magnitude:.3e}); \
         the (ik)^(-j/N) multiplier is singular at k = 0"
    )]
    MeanMode { residue: usize, magnitude: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("eigendecomposition failed: {0}")]
    Lapack(String),
}
