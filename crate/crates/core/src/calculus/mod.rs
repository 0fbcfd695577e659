//! Holomorphic functional calculus for `Q = P + Q₊` in the graded matrix model.
//!
//! Everything except [`GradedOperator::wave_contour`] is evaluated by exact
//! residue calculus: contour integrals against the finite Neumann expansion of
//! the resolvent collapse to divided differences over eigenvalue tuples of `P`.
//! The contour normalisation is `đλ = (i/2π)dλ`.

mod divided;
pub mod flat;
mod index;
mod operator;
pub mod quad;
pub mod sample;
mod spectral;

use thiserror::Error;

pub use divided::{DividedDifferences, Exponential, NodeFunction, Power, RecursiveDd, SimplexDd};
pub use index::{dstr_identity_check, supertrace_form, supertrace_index, DstrReport};
pub use operator::{ContourSpec, GradedOperator, WaveMethod};
pub use spectral::{Eigenbasis, SpectralDecomposition};

use crate::graded::GradedError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error("P must be square and match the form dimension")]
    Shape,
    #[error("P is not Hermitian")]
    NotHermitian,
    #[error("P is not positive definite (smallest eigenvalue {0})")]
    NotPositive(f64),
    #[error("P must be block diagonal for the N⁺|N⁻ grading")]
    OddDegreeZero,
    #[error("Q₊ has a nonzero degree-0 term")]
    DegreeZeroInQplus,
    #[error("order must be a positive integer")]
    ZeroOrder,
    #[error("λ = {re} + {im}i lies on the spectrum of P")]
    Singular { re: f64, im: f64 },
    #[error("by-parts representation undefined: s = {s_re} is one of 1..={n}")]
    ByPartsPole { s_re: f64, n: usize },
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("contour needs at least 64 points per edge, got {0}")]
    ContourResolution(usize),
    #[error("contour edges ε = {epsilon}, R = {right} must bracket spec √P ⊂ [{low}, {high}]")]
    ContourCollision { epsilon: f64, right: f64, low: f64, high: f64 },
    #[error("simplex quadrature error estimate {estimate:e} above tolerance {tol:e}")]
    QuadratureTolerance { estimate: f64, tol: f64 },
    #[error("connection term must have odd total parity")]
    ParityMismatch,
    #[error("Hermitian eigensolver failed to converge")]
    EigenFailure,
    #[error("oracle failure: {0}")]
    OracleFailure(&'static str),
}
