//! Exterior-algebra valued matrices `Λ(ℝ^β) ⊗ End(ℂ^{N⁺|N⁻})`.

mod family;
mod form;
mod index;
mod mat;

use num_complex::Complex;
use num_rational::BigRational;
use thiserror::Error;

pub use family::{BoundaryRule, GradedFamily};
pub use form::GradedMatrixForm;
pub use index::{MultiIndex, MAX_BASE_DIM};
pub use mat::{Mat, Scalar};

/// Double-precision graded form.
pub type CForm = GradedMatrixForm<num_complex::Complex64>;
/// Exact complex-rational graded form.
pub type QForm = GradedMatrixForm<Complex<BigRational>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradedError {
    #[error("base dimension {0} exceeds the supported maximum of 8")]
    BaseDimTooLarge(usize),
    #[error("fibre dimension N⁺ + N⁻ must be positive")]
    EmptyFibre,
    #[error("label {label} outside 1..={beta}")]
    LabelOutOfRange { label: usize, beta: usize },
    #[error("repeated label {0}: the wedge vanishes")]
    RepeatedLabel(usize),
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    MatrixShape { expected: usize, rows: usize, cols: usize },
    #[error("shape mismatch (β, N⁺, N⁻): {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize, usize), right: (usize, usize, usize) },
    #[error("rescaling parameter must be nonzero")]
    ZeroRescale,
    #[error("base box must be nonempty with a positive step")]
    BaseBox,
    #[error("base point coordinate {coordinate} = {value} is too close to the boundary")]
    BoundaryPoint { coordinate: usize, value: f64 },
}
