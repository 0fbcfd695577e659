//! Computational core for fibred wave-trace experiments.
//!
//! The crate is organised bottom-up: [`graded`] holds the exterior-algebra
//! valued matrices, [`calculus`] builds holomorphic functional calculus on
//! top of it, [`symbol`] runs the exact pseudodifferential recursions on
//! circle fibres, [`spectra`] and [`trace`] handle the spectral side,
//! [`spa`] the vertical stationary phase and [`pushdown`] the covering
//! trace formulas.

pub mod calculus;
pub mod graded;
pub mod pushdown;
pub mod spa;
pub mod spectra;
pub mod symbol;
pub mod trace;

pub use graded::{CForm, GradedFamily, GradedMatrixForm, Mat, MultiIndex, QForm, Scalar};
pub use num_complex::Complex64;
