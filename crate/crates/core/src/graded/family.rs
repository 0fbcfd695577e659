use std::sync::Arc;

use num_complex::Complex64;

use super::{CForm, GradedError, Mat, MultiIndex};

type FormFn = dyn Fn(&[f64]) -> CForm + Send + Sync;

/// Smooth family of graded forms over a box in `ℝ^β`, sampled for finite
/// differences with step `h`.
#[derive(Clone)]
pub struct GradedFamily {
    lower: Vec<f64>,
    upper: Vec<f64>,
    step: f64,
    shape: (usize, usize, usize),
    at: Arc<FormFn>,
}

/// Stencil choice at base points too close to the edge of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BoundaryRule {
    #[default]
    Reject,
    OneSided,
}

impl GradedFamily {
    /// `lower`/`upper` bound the base box; `shape` is `(β, N⁺, N⁻)` and must
    /// match every form produced by `at`.
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        step: f64,
        shape: (usize, usize, usize),
        at: impl Fn(&[f64]) -> CForm + Send + Sync + 'static,
    ) -> Result<Self, GradedError> {
        if lower.len() != shape.0 || upper.len() != shape.0 {
            return Err(GradedError::BaseBox);
        }
        if lower.iter().zip(&upper).any(|(lo, hi)| !(lo < hi)) || !(step > 0.0) {
            return Err(GradedError::BaseBox);
        }
        Ok(GradedFamily { lower, upper, step, shape, at: Arc::new(at) })
    }

    /// Base grid along coordinate `i` with spacing `h`.
    pub fn grid(&self, i: usize) -> Vec<f64> {
        let n = ((self.upper[i] - self.lower[i]) / self.step).floor() as usize;
        (0..=n).map(|k| self.lower[i] + k as f64 * self.step).collect()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.shape
    }

    pub fn at(&self, b: &[f64]) -> Result<CForm, GradedError> {
        if b.len() != self.shape.0 {
            return Err(GradedError::BaseBox);
        }
        let f = (self.at)(b);
        if f.shape() != self.shape {
            return Err(GradedError::DimensionMismatch { left: self.shape, right: f.shape() });
        }
        Ok(f)
    }

    /// Applies `f` pointwise, keeping domain and step.
    pub fn map(&self, shape: (usize, usize, usize), f: impl Fn(CForm) -> CForm + Send + Sync + 'static) -> Self {
        let inner = self.at.clone();
        GradedFamily {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            step: self.step,
            shape,
            at: Arc::new(move |b| f(inner(b))),
        }
    }

    /// Exterior derivative `Σ_i db_i ∧ ∂_{b_i} x(b)` by second-order finite
    /// differences.
    pub fn numeric_d_b(&self, b: &[f64], rule: BoundaryRule) -> Result<CForm, GradedError> {
        let (beta, plus, minus) = self.shape;
        let h = self.step;
        let mut out = CForm::zero(beta, plus, minus)?;
        for i in 0..beta {
            let shifted = |delta: f64| -> Result<CForm, GradedError> {
                let mut p = b.to_vec();
                p[i] += delta;
                self.at(&p)
            };
            let fits = |delta: f64| {
                let x = b[i] + delta;
                x >= self.lower[i] - 1e-15 && x <= self.upper[i] + 1e-15
            };
            let deriv = if fits(-h) && fits(h) {
                shifted(h)?.sub(&shifted(-h)?)?.scale(&Complex64::new(0.5 / h, 0.0))
            } else {
                if rule == BoundaryRule::Reject {
                    return Err(GradedError::BoundaryPoint { coordinate: i + 1, value: b[i] });
                }
                let dir = if fits(2.0 * h) { 1.0 } else if fits(-2.0 * h) { -1.0 } else {
                    return Err(GradedError::BoundaryPoint { coordinate: i + 1, value: b[i] });
                };
                // (−3f₀ + 4f₁ − f₂)/(2h) along `dir`
                let f0 = self.at(b)?.scale(&Complex64::new(-3.0, 0.0));
                let f1 = shifted(dir * h)?.scale(&Complex64::new(4.0, 0.0));
                let f2 = shifted(2.0 * dir * h)?;
                f0.add(&f1)?.sub(&f2)?.scale(&Complex64::new(dir * 0.5 / h, 0.0))
            };
            let dbi = CForm::zero(beta, plus, minus)?.with_index(MultiIndex::single(i + 1), Mat::identity(plus + minus))?;
            out = out.add(&dbi.wedge_compose(&deriv)?)?;
        }
        Ok(out)
    }
}

impl std::fmt::Debug for GradedFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GradedFamily")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("step", &self.step)
            .field("shape", &self.shape)
            .finish()
    }
}
