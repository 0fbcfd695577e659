//! Push-down kernels and vertical traces on covers of the circle.
//!
//! A Gaussian `f(ζ) = exp(−(ζ−μ)²/2s²)` defines the translation-invariant
//! kernel `K(p, q) = ∫ e^{i(p−q)ζ} f(ζ) dζ = F(f)(p − q)` on the line. The
//! `k`-fold cover `ℝ/2πkℤ` receives `Σ_n K(x, y + 2πkn)`. Fibre measures are
//! `dx/2π`, so the base circle has unit mass.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PushdownError {
    #[error("gaussian scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("gaussian centre must be finite")]
    Centre,
    #[error("cover fold must be at least 1")]
    Fold,
    #[error("tail bound {target:e} needs {terms} terms (budget {budget})")]
    TailBudget { target: f64, terms: u64, budget: u64 },
    #[error("base grid and parameter list differ in length")]
    BaseGrid,
}

/// Largest number of lattice terms a single sum may use.
pub const TERM_BUDGET: u64 = 10_000_000;

/// Target for every truncated tail.
pub const TAIL_TARGET: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    scale: f64,
    centre: f64,
}

impl Gaussian {
    pub fn new(scale: f64, centre: f64) -> Result<Self, PushdownError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(PushdownError::Scale(scale));
        }
        if !centre.is_finite() {
            return Err(PushdownError::Centre);
        }
        Ok(Gaussian { scale, centre })
    }

    pub fn standard() -> Self {
        Gaussian { scale: 1.0, centre: 0.0 }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn centre(&self) -> f64 {
        self.centre
    }

    pub fn eval(&self, zeta: f64) -> f64 {
        (-(zeta - self.centre).powi(2) / (2.0 * self.scale * self.scale)).exp()
    }

    /// `F(f)(x) = ∫ e^{ixζ} f(ζ) dζ = s√(2π) e^{iμx} e^{−s²x²/2}`.
    pub fn transform(&self, x: f64) -> Complex64 {
        let s = self.scale;
        Complex64::from_polar(s * (2.0 * PI).sqrt() * (-s * s * x * x / 2.0).exp(), self.centre * x)
    }

    /// Radius beyond which `Σ |F(x_0 + step·n)|` over `|x| > radius` stays
    /// below `target`, with the number of terms it implies.
    fn transform_radius(&self, step: f64, target: f64) -> Result<(f64, i64), PushdownError> {
        let s = self.scale;
        let peak = s * (2.0 * PI).sqrt();
        gaussian_radius(peak, s * s, step, target)
    }

    /// Same for `Σ f(n)` around the centre.
    fn sample_radius(&self, target: f64) -> Result<(f64, i64), PushdownError> {
        gaussian_radius(1.0, 1.0 / (self.scale * self.scale), 1.0, target)
    }
}

/// Smallest radius `R` with `2·peak·e^{−aR²/2}/(1 − e^{−aR·step}) ≤ target`,
/// a bound on `Σ peak·e^{−a(R + j·step)²/2}` over both sides.
fn gaussian_radius(peak: f64, a: f64, step: f64, target: f64) -> Result<(f64, i64), PushdownError> {
    let bound = |r: f64| 2.0 * peak * (-a * r * r / 2.0).exp() / (1.0 - (-a * r * step).exp());
    let mut r = step;
    while bound(r) > target {
        r *= 1.25;
        let terms = (2.0 * r / step) as u64 + 1;
        if terms > TERM_BUDGET {
            return Err(PushdownError::TailBudget { target, terms, budget: TERM_BUDGET });
        }
    }
    Ok((r, (r / step).ceil() as i64 + 1))
}

/// Gaussian parameters over a base grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchwartzFamily {
    base: Vec<f64>,
    members: Vec<Gaussian>,
}

impl SchwartzFamily {
    pub fn new(base: Vec<f64>, members: Vec<Gaussian>) -> Result<Self, PushdownError> {
        if base.is_empty() || base.len() != members.len() {
            return Err(PushdownError::BaseGrid);
        }
        Ok(SchwartzFamily { base, members })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn member(&self, i: usize) -> Gaussian {
        self.members[i]
    }

    /// `(b, value, tail)` of the vertical trace on each fibre.
    pub fn vertical_traces(&self, cover: CoverSpec) -> Result<Vec<(f64, Complex64, f64)>, PushdownError> {
        self.base
            .par_iter()
            .zip(&self.members)
            .map(|(b, f)| vertical_trace_cover(f, cover).map(|t| (*b, t.value, t.tail_bound)))
            .collect()
    }
}

/// `k`-fold cover of the circle `ℝ/2πℤ`, translation step `2πk`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSpec {
    fold: u32,
}

impl CoverSpec {
    pub fn new(fold: u32) -> Result<Self, PushdownError> {
        if fold == 0 {
            return Err(PushdownError::Fold);
        }
        Ok(CoverSpec { fold })
    }

    pub fn fold(&self) -> u32 {
        self.fold
    }

    pub fn step(&self) -> f64 {
        2.0 * PI * self.fold as f64
    }
}

/// `K(p, q) = F(f)(p − q)`, closed form.
pub fn kernel_from_symbol(f: &Gaussian, p: f64, q: f64) -> Complex64 {
    f.transform(p - q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PushdownValue {
    pub value: Complex64,
    pub terms: i64,
    pub tail_bound: f64,
}

/// Pushes a translation-invariant kernel with an explicit tail to a quotient.
fn lattice_sum(f: &Gaussian, offset: f64, step: f64, phase: impl Fn(i64) -> Complex64) -> Result<PushdownValue, PushdownError> {
    let (radius, _) = f.transform_radius(step, TAIL_TARGET)?;
    // n with |offset − step·n| ≤ radius
    let lo = ((offset - radius) / step).floor() as i64;
    let hi = ((offset + radius) / step).ceil() as i64;
    let value = (lo..=hi).map(|n| phase(n) * f.transform(offset - step * n as f64)).sum();
    Ok(PushdownValue { value, terms: hi - lo + 1, tail_bound: TAIL_TARGET })
}

/// `K̄(p̄, q̄) = Σ_n K(p, q + step·n)` from lifts `p`, `q`.
pub fn pushdown_sum(f: &Gaussian, cover: CoverSpec, p: f64, q: f64) -> Result<PushdownValue, PushdownError> {
    lattice_sum(f, p - q, cover.step(), |_| Complex64::new(1.0, 0.0))
}

/// Push-down twisted by the character `n ↦ e^{2πi·j·n/k}` of `ℤ`, which
/// factors through `ℤ_k`.
pub fn twisted_pushdown(f: &Gaussian, k: u32, j: u32, p: f64, q: f64) -> Result<PushdownValue, PushdownError> {
    if k == 0 {
        return Err(PushdownError::Fold);
    }
    let angle = 2.0 * PI * j as f64 / k as f64;
    lattice_sum(f, p - q, 2.0 * PI, |n| Complex64::from_polar(1.0, angle * n as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverTrace {
    pub fold: u32,
    /// `∫ K̄(x, x) dx/2π` over the cover.
    pub value: Complex64,
    /// `k·Σ_n F(f)(2πkn)`.
    pub closed_form: Complex64,
    /// Traces of the `k` twisted push-downs to the base circle.
    pub sectors: Vec<Complex64>,
    pub tail_bound: f64,
}

/// Vertical trace over the `k`-fold cover, three ways.
pub fn vertical_trace_cover(f: &Gaussian, cover: CoverSpec) -> Result<CoverTrace, PushdownError> {
    let k = cover.fold;
    // the diagonal is constant; the periodic trapezoid on it is exact
    let samples = 8;
    let length = cover.step();
    let mut diag = Complex64::new(0.0, 0.0);
    for i in 0..samples {
        let x = length * i as f64 / samples as f64;
        diag += pushdown_sum(f, cover, x, x)?.value;
    }
    let value = diag / samples as f64 * (length / (2.0 * PI));

    let (_, terms) = f.transform_radius(length, TAIL_TARGET)?;
    let closed_form = (-terms..=terms).map(|n| f.transform(length * n as f64)).sum::<Complex64>() * k as f64;

    let sectors = (0..k).map(|j| twisted_pushdown(f, k, j, 0.0, 0.0).map(|v| v.value)).collect::<Result<Vec<_>, _>>()?;
    Ok(CoverTrace { fold: k, value, closed_form, sectors, tail_bound: k as f64 * TAIL_TARGET })
}

/// Pushes the `k`-fold kernel down the remaining `ℤ_k`:
/// `Σ_{a<k} K̄_k(p, q + 2πa)`, to compare with `K̄_1(p, q)`.
pub fn tower_pushdown(f: &Gaussian, cover: CoverSpec, p: f64, q: f64) -> Result<Complex64, PushdownError> {
    (0..cover.fold).map(|a| pushdown_sum(f, cover, p, q + 2.0 * PI * a as f64).map(|v| v.value)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoissonCheck {
    /// `Σ_n f(n)`.
    pub samples: f64,
    /// `Σ_k F(f)(2πk)`.
    pub transform: Complex64,
    pub residual: f64,
    pub tail_bound: f64,
}

/// `Σ_n f(n) = Σ_k F(f)(2πk)` with both sides truncated by certified tails.
pub fn classical_poisson_check(f: &Gaussian) -> Result<PoissonCheck, PushdownError> {
    let (radius, _) = f.sample_radius(TAIL_TARGET)?;
    let lo = (f.centre - radius).floor() as i64;
    let hi = (f.centre + radius).ceil() as i64;
    let samples: f64 = (lo..=hi).map(|n| f.eval(n as f64)).sum();
    let (_, terms) = f.transform_radius(2.0 * PI, TAIL_TARGET)?;
    let transform: Complex64 = (-terms..=terms).map(|k| f.transform(2.0 * PI * k as f64)).sum();
    Ok(PoissonCheck { samples, transform, residual: (transform - samples).norm(), tail_bound: 2.0 * TAIL_TARGET })
}
