use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::SymbolError;

/// Exact complex rational.
pub type CQ = Complex<BigRational>;

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn cq(re: BigRational, im: BigRational) -> CQ {
    Complex::new(re, im)
}

pub fn cq_real(x: BigRational) -> CQ {
    Complex::new(x, BigRational::zero())
}

pub fn cq_int(n: i64) -> CQ {
    cq_real(BigRational::from_integer(n.into()))
}

pub fn cq_to_f64(z: &CQ) -> Complex64 {
    Complex64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

/// Exact rational from the decimal expansion of a double (exact binary value).
pub fn rational_from_f64(x: f64) -> Result<BigRational, SymbolError> {
    BigRational::from_float(x).ok_or(SymbolError::NonFinite(x))
}

/// Parses a decimal literal such as `-0.125` or `3/8` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, SymbolError> {
    let s = s.trim();
    let bad = || SymbolError::BadLiteral(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    if !all.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num: BigInt = all.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Finite Fourier series `Σ_k c_k e^{ikx}` with exact complex-rational coefficients.
#[derive(Clone, PartialEq, Default)]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, CQ>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(c: CQ) -> Self {
        TrigPoly::zero().with(0, c)
    }

    pub fn one() -> Self {
        TrigPoly::constant(cq_int(1))
    }

    /// Adds `c·e^{ikx}`.
    pub fn with(mut self, k: i64, c: CQ) -> Self {
        self.add_coeff(k, c);
        self
    }

    fn add_coeff(&mut self, k: i64, c: CQ) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(k).or_insert_with(CQ::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    /// `a·cos(kx)`.
    pub fn cos(k: i64, a: BigRational) -> Self {
        let half = a / BigRational::from_integer(2.into());
        TrigPoly::zero().with(k, cq_real(half.clone())).with(-k, cq_real(half))
    }

    /// `a·sin(kx) = a(e^{ikx} − e^{−ikx})/(2i)`.
    pub fn sin(k: i64, a: BigRational) -> Self {
        let half = a / BigRational::from_integer(2.into());
        let z = BigRational::zero();
        TrigPoly::zero().with(k, cq(z.clone(), -half.clone())).with(-k, cq(z, half))
    }

    /// `c₀ + Σ a_k cos kx + Σ b_k sin kx`.
    pub fn from_real_series(c0: BigRational, cos: &[(i64, BigRational)], sin: &[(i64, BigRational)]) -> Self {
        let mut t = TrigPoly::constant(cq_real(c0));
        for (k, a) in cos {
            t = t.add(&TrigPoly::cos(*k, a.clone()));
        }
        for (k, b) in sin {
            t = t.add(&TrigPoly::sin(*k, b.clone()));
        }
        t
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&i64, &CQ)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, k: i64) -> CQ {
        self.coeffs.get(&k).cloned().unwrap_or_else(CQ::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|&k| k == 0)
    }

    pub fn max_frequency(&self) -> i64 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    /// True when `c_{−k} = conj(c_k)` for every `k`.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|(k, c)| self.coeff(-k) == c.conj())
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_coeff(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TrigPoly {
        TrigPoly { coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c.clone())).collect() }
    }

    pub fn scale(&self, s: &CQ) -> TrigPoly {
        if s.is_zero() {
            return TrigPoly::zero();
        }
        TrigPoly { coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.clone() * s.clone())).collect() }
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                out.add_coeff(k1 + k2, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// `d/dx`: multiplies `c_k` by `ik`.
    pub fn derivative(&self) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (k, c) in &self.coeffs {
            let ik = cq(BigRational::zero(), BigRational::from_integer((*k).into()));
            out.add_coeff(*k, c.clone() * ik);
        }
        out
    }

    pub fn numeric(&self) -> NumericTrig {
        NumericTrig { terms: self.coeffs.iter().map(|(k, c)| (*k, cq_to_f64(c))).collect() }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.numeric().eval(x)
    }
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|(k, c)| format!("({} + {}i)e^{{{k}ix}}", c.re, c.im)).collect();
        if parts.is_empty() { write!(f, "0") } else { write!(f, "{}", parts.join(" + ")) }
    }
}

/// Floating-point evaluation form of a [`TrigPoly`].
#[derive(Clone, Debug, PartialEq)]
pub struct NumericTrig {
    terms: Vec<(i64, Complex64)>,
}

impl NumericTrig {
    pub fn constant(c: f64) -> Self {
        NumericTrig { terms: vec![(0, Complex64::new(c, 0.0))] }
    }

    pub fn from_terms(terms: Vec<(i64, Complex64)>) -> Self {
        NumericTrig { terms }
    }

    pub fn terms(&self) -> &[(i64, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|(k, c)| c * Complex64::new(0.0, *k as f64 * x).exp()).sum()
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(x).re
    }

    /// `m`-th derivative at `x`.
    pub fn derivative_at(&self, m: u32, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| c * Complex64::new(0.0, *k as f64).powu(m) * Complex64::new(0.0, *k as f64 * x).exp())
            .sum()
    }

    pub fn derivative(&self) -> NumericTrig {
        NumericTrig { terms: self.terms.iter().map(|(k, c)| (*k, c * Complex64::new(0.0, *k as f64))).collect() }
    }

    pub fn max_frequency(&self) -> i64 {
        self.terms.iter().map(|(k, _)| k.abs()).max().unwrap_or(0)
    }

    pub fn shifted(&self, shift: f64) -> NumericTrig {
        NumericTrig {
            terms: self.terms.iter().map(|(k, c)| (*k, c * Complex64::new(0.0, *k as f64 * shift).exp())).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> NumericTrig {
        NumericTrig { terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect() }
    }

    /// Σ |k·c_k|, a bound on the derivative.
    pub fn derivative_bound(&self) -> f64 {
        self.terms.iter().map(|(k, c)| (*k as f64).abs() * c.norm()).sum()
    }

    /// Certified lower bound of the real part over the circle from `n`
    /// equispaced samples and the derivative bound.
    pub fn min_lower_bound(&self, n: usize) -> f64 {
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let m = (0..n).map(|i| self.eval_real(i as f64 * h)).fold(f64::INFINITY, f64::min);
        m - 0.5 * h * self.derivative_bound()
    }
}

pub(crate) fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_sin_products_and_derivatives() {
        let c = TrigPoly::cos(1, rational(1, 1));
        let s = TrigPoly::sin(1, rational(1, 1));
        // 2 sin cos = sin 2x
        let lhs = c.mul(&s).scale(&cq_int(2));
        assert_eq!(lhs, TrigPoly::sin(2, rational(1, 1)));
        assert_eq!(c.derivative(), s.neg());
        assert!(c.add(&s).is_real());
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_rational("-0.125").unwrap(), rational(-1, 8));
        assert_eq!(parse_rational("3/8").unwrap(), rational(3, 8));
        assert_eq!(parse_rational("2.5e-1").unwrap(), rational(1, 4));
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn lower_bound_is_certified() {
        let w = TrigPoly::from_real_series(rational(1, 1), &[(1, rational(1, 2))], &[(2, rational(1, 5))]).numeric();
        let lb = w.min_lower_bound(64);
        let fine = (0..100_000).map(|i| w.eval_real(i as f64 * 2.0 * std::f64::consts::PI / 1e5)).fold(f64::INFINITY, f64::min);
        assert!(lb <= fine && lb > 0.0);
    }
}
