//! Dense small-matrix linear algebra, affine subspaces, forward-mode AD and a
//! Gauss–Newton root finder.

pub mod affine;
pub mod dual;
pub mod linalg;
pub mod newton;
mod tolerance;

pub use affine::{AffineMap, AffineSubspace};
pub use dual::{gradient, jacobian, Dual, Real};
pub use linalg::{matrix_from_rows, rank_factor, vector_from_slice, RankFactor};
pub use newton::{gauss_newton, FailureReason, Root, SolveFailure};
pub use tolerance::TolerancePolicy;

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry")]
    NonFinite,
    #[error("invalid tolerance policy {0:?}")]
    InvalidTolerance(TolerancePolicy),
}

/// Failure while evaluating a user- or catalog-supplied function.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("expected {expected} arguments, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("non-finite value")]
    NonFinite,
}
