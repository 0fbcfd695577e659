use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;
use statrs::function::gamma::gamma;

use super::parametrix::{Parametrix, ResolventTerm};
use super::ring::LaplaceOperatorSpec;
use super::trig::factorial;
use super::{laplace_symbol, parametrix_recursion, SymbolError};

/// Local invariants at `t = 0`.
///
/// Normalisation: `Tr e^{−tΔ} ∼ Σ_j b_j t^{(j−q)/2}` and `a_j = 2 b_j`
/// through the square-root zeta function, so that the zeta function of `Δ`
/// has residue `b_j / Γ((q−j)/2)` at `s = (q−j)/2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantTable {
    pub order: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub zeta_residues: Vec<ZetaPole>,
    /// Largest imaginary part discarded after x-integration.
    pub max_imag: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaPole {
    pub location: f64,
    pub residue: f64,
}

/// Coefficient of `(|ξ|_g − μ)^{−(2l+1)} r_{l,j}` in the square-root
/// resolvent at `μ = 0`, i.e. `∫_C λ^{−1/2}(p−λ)^{−(l+1)} đλ · p^{l+1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SqrtResolventTerm {
    pub l: usize,
    pub j: usize,
    pub coefficient: BigRational,
    pub pole_power: usize,
    pub numerator: super::TrigPoly,
}

/// `(2l)! / (4^l (l!)²)`.
fn sqrt_coefficient(l: usize) -> BigRational {
    let num = factorial(2 * l as u64);
    let den = num_traits::pow(BigInt::from(4), l) * factorial(l as u64) * factorial(l as u64);
    BigRational::new(num, den)
}

pub fn sqrt_resolvent(par: &Parametrix, j: usize) -> Vec<SqrtResolventTerm> {
    par.terms(j)
        .iter()
        .map(|t| SqrtResolventTerm {
            l: t.l,
            j,
            coefficient: sqrt_coefficient(t.l),
            pole_power: 2 * t.l + 1,
            numerator: t.numerator.clone(),
        })
        .collect()
}

/// `∫_C λ^{−s}(p−λ)^{−(l+1)} đλ = (s)_l/l! · p^{−s−l}`; returns the factor `(s)_l/l!`.
pub fn complex_power_weight(s: f64, l: usize) -> f64 {
    (0..l).fold(1.0, |acc, i| acc * (s + i as f64) / (i + 1) as f64)
}

/// `∫_C e^{−λ}(p−λ)^{−(l+1)} đλ = e^{−p}/l!`; returns `1/l!`.
pub fn exponential_weight(l: usize) -> f64 {
    (1..=l).fold(1.0, |acc, i| acc / i as f64)
}

/// `∫_{S^{q−1}} θ^α dθ`: zero unless every exponent is even, otherwise
/// `2 Π Γ((α_i+1)/2) / Γ((|α|+q)/2)`.
pub fn sphere_monomial_integral(exponents: &[u32]) -> f64 {
    if exponents.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let q = exponents.len() as f64;
    let total: u32 = exponents.iter().sum();
    let num: f64 = exponents.iter().map(|&a| gamma((a as f64 + 1.0) / 2.0)).product();
    2.0 * num / gamma((total as f64 + q) / 2.0)
}

/// Angular integral of the degree-`n` numerator: the two-point sum for
/// `q = 1`, and `|ξ|^n` over the circle for flat `q = 2`.
fn angular(q: usize, n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    match q {
        1 => sphere_monomial_integral(&[n as u32]),
        _ => sphere_monomial_integral(&vec![0; q]),
    }
}

fn periodic_integral(f: impl Fn(f64) -> Complex64, start: usize) -> Result<Complex64, SymbolError> {
    let sample = |n: usize| -> (Complex64, f64) {
        let h = 2.0 * PI / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for i in 0..n {
            let v = f(i as f64 * h);
            acc += v;
            scale += v.norm();
        }
        (acc * h, scale * h)
    };
    let mut n = start.next_power_of_two().max(16);
    let (mut prev, _) = sample(n);
    let mut history = vec![(n, prev.norm())];
    while n < (1 << 20) {
        n *= 2;
        let (cur, scale) = sample(n);
        history.push((n, cur.norm()));
        if (cur - prev).norm() <= 1e-13 * scale.max(1e-300) || (cur - prev).norm() < 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(SymbolError::QuadratureNonConvergence { history })
}

/// `S_{l,j} = ∫ dx ∫_{|η|_g=1} r_{l,j}(x, η) dσ(η)`, with the cosphere
/// measure induced by `dξ` (so the x-weight is `w^{−(n+q)/2}`).
pub fn moment_integral(spec: &LaplaceOperatorSpec, term: &ResolventTerm) -> Result<Complex64, SymbolError> {
    let n = term.xi_degree();
    let q = spec.q();
    let ang = angular(q, n);
    if ang == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = spec.w().numeric();
    let c = term.numerator.numeric();
    let power = -((n + q) as f64) / 2.0;
    let start = 32 * (w.max_frequency().max(c.max_frequency()) as usize + 1);
    let circle = periodic_integral(|x| c.eval(x) * w.eval_real(x).powf(power), start)?;
    Ok(circle * ang * (2.0 * PI).powi(q as i32 - 1))
}

fn per_level(
    spec: &LaplaceOperatorSpec,
    par: &Parametrix,
    weight: impl Fn(usize, usize) -> Result<f64, SymbolError>,
) -> Result<(Vec<f64>, f64), SymbolError> {
    let norm = (2.0 * PI).powi(-(spec.q() as i32));
    let mut values = Vec::with_capacity(par.order() + 1);
    let mut max_imag: f64 = 0.0;
    for j in 0..=par.order() {
        if j % 2 == 1 {
            // odd numerator degree: the η → −η sum vanishes identically
            values.push(0.0);
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for term in par.terms(j) {
            let s = moment_integral(spec, term)?;
            if s.norm() == 0.0 {
                continue;
            }
            acc += s * weight(term.l, j)?;
        }
        max_imag = max_imag.max(acc.im.abs() * norm);
        values.push(acc.re * norm);
    }
    Ok((values, max_imag))
}

/// `a_j = (2π)^{−q} Σ_l Γ(z)(z)_l/l! · S_{l,j}` with `z = (q−j)/2`: the
/// square-root zeta residue at `σ = q−j`, times `Γ((q−j)/2)`.
pub fn wave_invariants_a(spec: &LaplaceOperatorSpec, par: &Parametrix) -> Result<Vec<f64>, SymbolError> {
    let q = spec.q() as f64;
    per_level(spec, par, |l, j| {
        let z = (q - j as f64) / 2.0;
        if z <= 0.0 && z.fract() == 0.0 {
            return Err(SymbolError::GammaPole(z));
        }
        Ok(gamma(z) * complex_power_weight(z, l))
    })
    .map(|(a, _)| a)
}

/// Heat coefficients from `e^{−λ}` contour weights and Gaussian ξ-moments,
/// with the zeta poles `(q−j)/2` and residues `b_j/Γ((q−j)/2)`.
pub fn heat_invariants_b(spec: &LaplaceOperatorSpec, par: &Parametrix) -> Result<(Vec<f64>, Vec<ZetaPole>, f64), SymbolError> {
    let q = spec.q();
    let (b, max_imag) = per_level(spec, par, |l, j| {
        // ∫_0^∞ ρ^{n+q−1} e^{−ρ²} dρ = Γ((n+q)/2)/2
        let n = 2 * l - j;
        Ok(exponential_weight(l) * 0.5 * gamma((n + q) as f64 / 2.0))
    })?;
    let mut poles = Vec::new();
    for (j, bj) in b.iter().enumerate() {
        let z = (q as f64 - j as f64) / 2.0;
        if z <= 0.0 && z.fract() == 0.0 {
            continue;
        }
        poles.push(ZetaPole { location: z, residue: bj / gamma(z) });
    }
    Ok((b, poles, max_imag))
}

pub fn invariant_table(spec: &LaplaceOperatorSpec, order: usize) -> Result<InvariantTable, SymbolError> {
    let par = parametrix_recursion(&laplace_symbol(spec), order)?;
    let a = wave_invariants_a(spec, &par)?;
    let (b, zeta_residues, max_imag) = heat_invariants_b(spec, &par)?;
    Ok(InvariantTable { order, a, b, zeta_residues, max_imag })
}
