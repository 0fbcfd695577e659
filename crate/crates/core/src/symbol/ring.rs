use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::trig::{cq, cq_int, cq_real, TrigPoly, CQ};
use super::SymbolError;

/// Scalar Laplace-type operator `−w∂² − (w′/2)∂` on a circle fibre
/// (or a constant-coefficient flat torus when `q = 2`).
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceOperatorSpec {
    q: usize,
    w: TrigPoly,
    family_param: f64,
}

impl LaplaceOperatorSpec {
    pub fn new(q: usize, w: TrigPoly, family_param: f64) -> Result<Self, SymbolError> {
        if !(1..=2).contains(&q) {
            return Err(SymbolError::FibreDimension(q));
        }
        if !w.is_real() {
            return Err(SymbolError::ComplexMetric);
        }
        if q > 1 && !w.is_constant() {
            return Err(SymbolError::CurvedHigherDimension(q));
        }
        let numeric = w.numeric();
        let samples = 512 * (numeric.max_frequency() as usize + 1);
        let bound = numeric.min_lower_bound(samples);
        if bound <= 0.0 {
            return Err(SymbolError::NonPositiveMetric(bound));
        }
        Ok(LaplaceOperatorSpec { q, w, family_param })
    }

    /// Flat circle of length `2π`.
    pub fn flat(q: usize) -> Result<Self, SymbolError> {
        LaplaceOperatorSpec::new(q, TrigPoly::one(), 0.0)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn w(&self) -> &TrigPoly {
        &self.w
    }

    pub fn family_param(&self) -> f64 {
        self.family_param
    }

    /// Riemannian volume `∫ w^{−q/2} dx` over `[0, 2π)^q`.
    pub fn volume(&self) -> f64 {
        let w = self.w.numeric();
        let n = 256 * (w.max_frequency() as usize + 1);
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let circle: f64 = (0..n).map(|i| w.eval_real(i as f64 * h).powf(-0.5 * self.q as f64)).sum::<f64>() * h;
        circle * (2.0 * std::f64::consts::PI).powi(self.q as i32 - 1)
    }
}

/// Finite sum `Σ c_{a,b}(x) ξ^a D^b` with `D = (w ξ² − λ)^{−1}`.
///
/// The monomials `ξ^a D^b` (`a ≥ 0`, `b ∈ ℤ`) are linearly independent over
/// functions of `x`, so equality of symbols is equality of coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Symbol {
    terms: BTreeMap<(u32, i32), TrigPoly>,
}

impl Symbol {
    pub fn zero() -> Self {
        Symbol::default()
    }

    pub fn one() -> Self {
        Symbol::monomial(0, 0, TrigPoly::one())
    }

    pub fn monomial(xi: u32, pole: i32, coeff: TrigPoly) -> Self {
        let mut s = Symbol::zero();
        s.add_term(xi, pole, coeff);
        s
    }

    /// `D = (wξ² − λ)^{−1}`.
    pub fn resolvent_factor() -> Self {
        Symbol::monomial(0, 1, TrigPoly::one())
    }

    fn add_term(&mut self, xi: u32, pole: i32, coeff: TrigPoly) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry((xi, pole)).or_default();
        *entry = entry.add(&coeff);
        if entry.is_zero() {
            self.terms.remove(&(xi, pole));
        }
    }

    /// Iterates `((ξ power, D power), coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, i32), &TrigPoly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Joint degree of `ξ^a D^b` with `λ` weighted 2.
    pub fn monomial_degree(xi: u32, pole: i32) -> i32 {
        xi as i32 - 2 * pole
    }

    pub fn top_degree(&self) -> Option<i32> {
        self.terms.keys().map(|&(a, b)| Symbol::monomial_degree(a, b)).max()
    }

    pub fn homogeneous(&self, degree: i32) -> Symbol {
        self.filtered(|d| d == degree)
    }

    pub fn filtered(&self, keep: impl Fn(i32) -> bool) -> Symbol {
        Symbol {
            terms: self
                .terms
                .iter()
                .filter(|(&(a, b), _)| keep(Symbol::monomial_degree(a, b)))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Symbol) -> Symbol {
        let mut out = self.clone();
        for (&(a, b), c) in &other.terms {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Symbol) -> Symbol {
        self.add(&other.scale(&cq_int(-1)))
    }

    pub fn scale(&self, s: &CQ) -> Symbol {
        let mut out = Symbol::zero();
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, c.scale(s));
        }
        out
    }

    /// Pointwise product in `(x, ξ, λ)`.
    pub fn mul(&self, other: &Symbol) -> Symbol {
        let mut out = Symbol::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &other.terms {
                out.add_term(a1 + a2, b1 + b2, c1.mul(c2));
            }
        }
        out
    }
}

/// Differentiation and composition for symbols built over a fixed `w`.
#[derive(Clone, Debug)]
pub struct SymbolRing {
    w: TrigPoly,
    dw: TrigPoly,
}

impl SymbolRing {
    pub fn new(w: &TrigPoly) -> Self {
        SymbolRing { w: w.clone(), dw: w.derivative() }
    }

    pub fn w(&self) -> &TrigPoly {
        &self.w
    }

    /// `∂_ξ(c ξ^a D^b) = a c ξ^{a−1} D^b − 2b c w ξ^{a+1} D^{b+1}`.
    pub fn d_xi(&self, s: &Symbol) -> Symbol {
        let mut out = Symbol::zero();
        for (&(a, b), c) in &s.terms {
            if a > 0 {
                out.add_term(a - 1, b, c.scale(&cq_int(a as i64)));
            }
            if b != 0 {
                out.add_term(a + 1, b + 1, c.mul(&self.w).scale(&cq_int(-2 * b as i64)));
            }
        }
        out
    }

    /// `∂_x(c ξ^a D^b) = c′ ξ^a D^b − b c w′ ξ^{a+2} D^{b+1}`.
    pub fn d_x(&self, s: &Symbol) -> Symbol {
        let mut out = Symbol::zero();
        for (&(a, b), c) in &s.terms {
            out.add_term(a, b, c.derivative());
            if b != 0 {
                out.add_term(a + 2, b + 1, c.mul(&self.dw).scale(&cq_int(-(b as i64))));
            }
        }
        out
    }

    fn iterate(&self, s: &Symbol, times: usize, d: impl Fn(&Self, &Symbol) -> Symbol) -> Vec<Symbol> {
        let mut out = vec![s.clone()];
        for k in 0..times {
            out.push(d(self, &out[k]));
        }
        out
    }

    /// `Σ_α ((−i)^α/α!) ∂_ξ^α a · ∂_x^α b`, keeping joint degrees
    /// `≥ top(a) + top(b) − order`.
    pub fn compose(&self, a: &Symbol, b: &Symbol, order: usize) -> Symbol {
        let (Some(ta), Some(tb)) = (a.top_degree(), b.top_degree()) else {
            return Symbol::zero();
        };
        let floor = ta + tb - order as i32;
        let da = self.iterate(a, order, SymbolRing::d_xi);
        let db = self.iterate(b, order, SymbolRing::d_x);
        let mut out = Symbol::zero();
        for alpha in 0..=order {
            let term = da[alpha].mul(&db[alpha]).scale(&minus_i_power_over_factorial(alpha));
            out = out.add(&term.filtered(|d| d >= floor));
        }
        out
    }
}

/// `(−i)^α / α!` as an exact complex rational.
pub(crate) fn minus_i_power_over_factorial(alpha: usize) -> CQ {
    let inv = BigRational::new(One::one(), super::trig::factorial(alpha as u64));
    let z = BigRational::zero();
    match alpha % 4 {
        0 => cq_real(inv),
        1 => cq(z, -inv),
        2 => cq_real(-inv),
        _ => cq(z, inv),
    }
}

/// Homogeneous components of the full symbol.
#[derive(Clone, Debug)]
pub struct LaplaceSymbol {
    ring: SymbolRing,
    components: [Symbol; 3],
}

impl LaplaceSymbol {
    pub fn ring(&self) -> &SymbolRing {
        &self.ring
    }

    /// Component of ξ-degree `2 − k`.
    pub fn component(&self, k: usize) -> &Symbol {
        &self.components[k]
    }

    pub fn p2(&self) -> &Symbol {
        &self.components[0]
    }

    pub fn p1(&self) -> &Symbol {
        &self.components[1]
    }

    pub fn p0(&self) -> &Symbol {
        &self.components[2]
    }

    /// `p − λ = D^{−1} + p₁ + p₀`.
    pub fn minus_lambda(&self) -> Symbol {
        Symbol::monomial(0, -1, TrigPoly::one()).add(self.p1()).add(self.p0())
    }
}

/// `p₂ = wξ²`, `p₁ = −i(w′/2)ξ`, `p₀ = 0`.
pub fn laplace_symbol(spec: &LaplaceOperatorSpec) -> LaplaceSymbol {
    let ring = SymbolRing::new(spec.w());
    let p2 = Symbol::monomial(2, 0, spec.w().clone());
    let half_minus_i = cq(BigRational::zero(), -BigRational::new(1.into(), 2.into()));
    let p1 = Symbol::monomial(1, 0, ring.dw.scale(&half_minus_i));
    LaplaceSymbol { ring, components: [p2, p1, Symbol::zero()] }
}
