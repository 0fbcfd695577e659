//! Random graded operators from a caller-supplied uniform source on `[0, 1)`.

use num_complex::Complex64;

use super::{CalculusError, GradedOperator};
use crate::graded::{CForm, Mat, MultiIndex};

/// Shape and scale of a random operator.
#[derive(Clone, Copy, Debug)]
pub struct SampleShape {
    pub beta: usize,
    pub plus: usize,
    pub minus: usize,
    /// Spectrum of `P` is drawn inside `[lo, hi]`.
    pub spectrum: (f64, f64),
    /// Entry size of `Q₊` relative to `lo`.
    pub coupling: f64,
}

fn complex_gaussian(uniform: &mut impl FnMut() -> f64) -> Complex64 {
    // Box–Muller
    let u1 = uniform().max(1e-300);
    let u2 = uniform();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * th.cos(), r * th.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

/// Random unitary by Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary(n: usize, uniform: &mut impl FnMut() -> f64) -> Mat<Complex64> {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(uniform)).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    Mat::from_fn(n, n, |i, j| cols[j][i])
}

/// Hermitian matrix with eigenvalues uniform in `[lo, hi]`.
pub fn random_hermitian(n: usize, lo: f64, hi: f64, uniform: &mut impl FnMut() -> f64) -> Mat<Complex64> {
    let u = random_unitary(n, uniform);
    let d: Vec<Complex64> = (0..n).map(|_| Complex64::new(lo + (hi - lo) * uniform(), 0.0)).collect();
    let m = u.matmul(&Mat::diag(&d)).matmul(&u.adjoint());
    // symmetrise away rounding
    Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

pub fn random_matrix(rows: usize, cols: usize, scale: f64, uniform: &mut impl FnMut() -> f64) -> Mat<Complex64> {
    Mat::from_fn(rows, cols, |_, _| complex_gaussian(uniform) * scale)
}

/// `P` block-diagonal positive, `Q₊` with a random matrix on every
/// multi-index of positive degree.
pub fn random_operator(shape: SampleShape, uniform: &mut impl FnMut() -> f64) -> Result<GradedOperator, CalculusError> {
    let SampleShape { beta, plus, minus, spectrum: (lo, hi), coupling } = shape;
    let n = plus + minus;
    let mut p = Mat::zeros(n, n);
    if plus > 0 {
        p.set_block(0, 0, &random_hermitian(plus, lo, hi, uniform));
    }
    if minus > 0 {
        p.set_block(plus, plus, &random_hermitian(minus, lo, hi, uniform));
    }
    let mut qplus = CForm::zero(beta, plus, minus)?;
    for idx in MultiIndex::all(beta).filter(|k| k.degree() > 0) {
        let scale = coupling * lo / (n as f64).sqrt();
        qplus = qplus.with_index(idx, random_matrix(n, n, scale, uniform))?;
    }
    GradedOperator::new(p, qplus, 2)
}
