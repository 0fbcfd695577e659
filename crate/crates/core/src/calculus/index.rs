use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use super::{CalculusError, GradedOperator, WaveMethod};
use crate::graded::{BoundaryRule, CForm, GradedFamily, Mat};

/// `Str(e^{−it√(D⁻D⁺)} ⊖ e^{−it√(D⁺D⁻)})` with `D⁻ = (D⁺)†`.
///
/// `dplus` maps `ℂ^{N⁺} → ℂ^{N⁻}`. Eigenvalues below `1e-12·‖D⁺‖²` are set to
/// zero before exponentiating, so the cancelling pairs are computed from the
/// same floating values on both sides only up to rounding.
pub fn supertrace_index(dplus: &Mat<Complex64>, t: f64) -> Result<Complex64, CalculusError> {
    let dminus = dplus.adjoint();
    let h_plus = dminus.matmul(dplus);
    let h_minus = dplus.matmul(&dminus);
    let spec_plus = hermitian_eigenvalues(&h_plus)?;
    let spec_minus = hermitian_eigenvalues(&h_minus)?;
    let top = spec_plus.iter().chain(&spec_minus).cloned().fold(0.0f64, f64::max);
    let floor = 1e-12 * top.max(1e-300);
    let side = |spec: &[f64]| -> Complex64 {
        spec.iter()
            .map(|&l| {
                let l = if l <= floor { 0.0 } else { l };
                Complex64::new(0.0, -t * l.sqrt()).exp()
            })
            .sum()
    };
    Ok(side(&spec_plus) - side(&spec_minus))
}

fn hermitian_eigenvalues(m: &Mat<Complex64>) -> Result<Vec<f64>, CalculusError> {
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::try_new(m.to_nalgebra(), 1e-15, 10_000).ok_or(CalculusError::EigenFailure)?;
    Ok(eig.eigenvalues.iter().cloned().collect())
}

/// One-by-one form carrying the supertrace of `x` in every multi-index.
pub fn supertrace_form(x: &CForm) -> Result<CForm, CalculusError> {
    let mut out = CForm::zero(x.base_dim(), 1, 0)?;
    for (k, v) in x.supertrace() {
        out = out.with_index(k, Mat::diag(&[v]))?;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DstrReport {
    /// `max |d_B Str X − Str(d_B X + [A, X])|` per form degree.
    pub degree_residuals: Vec<f64>,
    /// Max entry of `[A, e^{−it√(A²)}]` per form degree.
    pub commutator_norms: Vec<f64>,
}

impl DstrReport {
    pub fn max_residual(&self) -> f64 {
        self.degree_residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_commutator(&self) -> f64 {
        self.commutator_norms.iter().cloned().fold(0.0, f64::max)
    }
}

/// Checks `d Str X = Str [d_B + A, X]` by finite differences and the
/// commutation of `A` with `e^{−it√(A²)}` at the base point `b`.
pub fn dstr_identity_check(
    connection: &GradedFamily,
    x: &GradedFamily,
    b: &[f64],
    t: f64,
) -> Result<DstrReport, CalculusError> {
    let a = connection.at(b)?;
    let scale = a.max_abs().max(1.0);
    if a.parity_part(0).max_abs() > 1e-14 * scale {
        return Err(CalculusError::ParityMismatch);
    }
    let beta = a.base_dim();
    let str_family = x.map((beta, 1, 0), |f| supertrace_form(&f).expect("shape fixed by construction"));
    let lhs = str_family.numeric_d_b(b, BoundaryRule::Reject)?;
    let dx = x.numeric_d_b(b, BoundaryRule::Reject)?;
    let rhs = supertrace_form(&dx.add(&a.supercommutator(&x.at(b)?)?)?)?;
    let diff = lhs.sub(&rhs)?;
    let degree_residuals = diff.degree_norms();

    let square = a.wedge_compose(&a)?;
    let p = square.coefficient(crate::graded::MultiIndex::EMPTY);
    let op = GradedOperator::new(p, square.positive_part(), 2)?;
    let u = op.wave_duhamel(2, t, WaveMethod::ExactDividedDifferences)?;
    let comm = a.wedge_compose(&u)?.sub(&u.wedge_compose(&a)?)?;
    Ok(DstrReport { degree_residuals, commutator_norms: comm.degree_norms() })
}
