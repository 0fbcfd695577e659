//! Ungraded oracle: the left-multiplication representation of
//! `Λ(ℝ^β) ⊗ End(ℂ^N)` on `Λ(ℝ^β) ⊗ ℂ^N`, a matrix of size `2^β·N`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CalculusError;
use crate::graded::{CForm, Mat, MultiIndex};

/// Matrix of `η ⊗ v ↦ x·(η ⊗ v)`; block `(K, J)` sits at rows `K·N`, columns `J·N`.
pub fn flatten(x: &CForm) -> DMatrix<Complex64> {
    let (beta, np, _) = x.shape();
    let n = x.dim();
    let size = (1usize << beta) * n;
    let mut out = DMatrix::zeros(size, size);
    for (idx, a) in x.terms() {
        let flipped = a.parity_conjugate(np);
        for j in MultiIndex::all(beta) {
            let Some((k, sign)) = idx.wedge(j) else { continue };
            let block = if j.degree() % 2 == 1 { &flipped } else { a };
            let (r0, c0) = (k.mask() as usize * n, j.mask() as usize * n);
            for r in 0..n {
                for cc in 0..n {
                    out[(r0 + r, c0 + cc)] += block[(r, cc)] * sign as f64;
                }
            }
        }
    }
    out
}

/// Reads a graded form back from the image of `1 ⊗ v`.
pub fn unflatten(m: &DMatrix<Complex64>, shape: (usize, usize, usize)) -> Result<CForm, CalculusError> {
    let (beta, np, nm) = shape;
    let n = np + nm;
    let mut out = CForm::zero(beta, np, nm)?;
    for k in MultiIndex::all(beta) {
        let r0 = k.mask() as usize * n;
        let block = Mat::from_fn(n, n, |i, j| m[(r0 + i, j)]);
        if block.max_abs() > 0.0 {
            out = out.with_index(k, block)?;
        }
    }
    Ok(out)
}

/// Principal square root by the Denman–Beavers iteration.
pub fn sqrtm(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, CalculusError> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<Complex64>::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().ok_or(CalculusError::OracleFailure("singular iterate"))?;
        let zi = z.clone().try_inverse().ok_or(CalculusError::OracleFailure("singular iterate"))?;
        let y_next = (&y + zi) * Complex64::new(0.5, 0.0);
        let z_next = (&z + yi) * Complex64::new(0.5, 0.0);
        let delta = (&y_next - &y).norm() / y_next.norm();
        y = y_next;
        z = z_next;
        if delta < 1e-15 {
            return Ok(y);
        }
    }
    Err(CalculusError::OracleFailure("Denman–Beavers did not converge"))
}

pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.exp()
}

/// `e^{−it√Q}` through the flattened matrices.
pub fn wave_oracle(q: &CForm, t: f64) -> Result<CForm, CalculusError> {
    let s = sqrtm(&flatten(q))?;
    unflatten(&expm(&(s * Complex64::new(0.0, -t))), q.shape())
}

/// `e^{−tQ}` through the flattened matrices.
pub fn heat_oracle(q: &CForm, t: f64) -> Result<CForm, CalculusError> {
    unflatten(&expm(&(flatten(q) * Complex64::new(-t, 0.0))), q.shape())
}

/// `√Q` through the flattened matrices.
pub fn sqrt_oracle(q: &CForm) -> Result<CForm, CalculusError> {
    unflatten(&sqrtm(&flatten(q))?, q.shape())
}
