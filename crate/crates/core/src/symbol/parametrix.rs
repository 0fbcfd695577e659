use super::ring::{minus_i_power_over_factorial, LaplaceSymbol, Symbol};
use super::trig::{cq_int, TrigPoly};
use super::SymbolError;

/// Largest truncation order accepted by [`parametrix_recursion`].
pub const MAX_ORDER: usize = 8;

/// One summand `c(x) ξ^{2l−j} · D^{l+1}` of `r_{−2−j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolventTerm {
    pub l: usize,
    pub j: usize,
    pub numerator: TrigPoly,
}

impl ResolventTerm {
    pub fn xi_degree(&self) -> usize {
        2 * self.l - self.j
    }
}

#[derive(Clone, Debug)]
pub struct Parametrix {
    levels: Vec<Symbol>,
    terms: Vec<Vec<ResolventTerm>>,
}

impl Parametrix {
    pub fn order(&self) -> usize {
        self.levels.len() - 1
    }

    /// `r_{−2−j}` as a symbol.
    pub fn level(&self, j: usize) -> &Symbol {
        &self.levels[j]
    }

    /// `r_{−2−j}` in the normal form `l ↦ r_{l,j}`, sorted by `l`.
    pub fn terms(&self, j: usize) -> &[ResolventTerm] {
        &self.terms[j]
    }

    pub fn sum(&self) -> Symbol {
        self.levels.iter().fold(Symbol::zero(), |acc, s| acc.add(s))
    }
}

/// `r_{−2} = D`, `r_{−2−j} = −D Σ_{α+k+l=j, l<j} ((−i)^α/α!) ∂_ξ^α p_{2−k} ∂_x^α r_{−2−l}`.
pub fn parametrix_recursion(sym: &LaplaceSymbol, order: usize) -> Result<Parametrix, SymbolError> {
    if order > MAX_ORDER {
        return Err(SymbolError::OrderTooLarge { requested: order, max: MAX_ORDER });
    }
    let ring = sym.ring();
    // ∂_ξ^α p_{2−k}
    let dp: Vec<Vec<Symbol>> = (0..3)
        .map(|k| {
            let mut v = vec![sym.component(k).clone()];
            for a in 0..order {
                let next = ring.d_xi(&v[a]);
                v.push(next);
            }
            v
        })
        .collect();
    // ∂_x^α r_{−2−l}, grown as levels appear
    let mut dr: Vec<Vec<Symbol>> = Vec::new();
    let mut levels = vec![Symbol::resolvent_factor()];
    for j in 0..=order {
        if j > 0 {
            let mut acc = Symbol::zero();
            for l in 0..j {
                for k in 0..=(j - l).min(2) {
                    let alpha = j - l - k;
                    if dp[k][alpha].is_zero() {
                        continue;
                    }
                    let term = dp[k][alpha].mul(&dr[l][alpha]).scale(&minus_i_power_over_factorial(alpha));
                    acc = acc.add(&term);
                }
            }
            levels.push(Symbol::resolvent_factor().mul(&acc).scale(&cq_int(-1)));
        }
        let mut chain = vec![levels[j].clone()];
        for a in 0..order - j {
            let next = ring.d_x(&chain[a]);
            chain.push(next);
        }
        dr.push(chain);
    }
    let terms = levels.iter().enumerate().map(|(j, s)| normal_form(j, s)).collect::<Result<Vec<_>, _>>()?;
    Ok(Parametrix { levels, terms })
}

fn normal_form(j: usize, s: &Symbol) -> Result<Vec<ResolventTerm>, SymbolError> {
    let mut out = Vec::new();
    for (&(xi, pole), c) in s.terms() {
        let l = pole - 1;
        if l < 0 || xi as i32 != 2 * l - j as i32 {
            return Err(SymbolError::Homogeneity { j, xi, pole });
        }
        out.push(ResolventTerm { l: l as usize, j, numerator: c.clone() });
    }
    out.sort_by_key(|t| t.l);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TelescopeReport {
    /// True when `(p−λ)∘Σr − 1` has no monomial of degree `≥ −order`.
    pub exact: bool,
    /// Highest degree left in the residual, if any.
    pub residual_top_degree: Option<i32>,
}

/// Composes `p − λ` with the truncated parametrix two orders past the
/// truncation and inspects the residual.
pub fn telescoping_check(sym: &LaplaceSymbol, par: &Parametrix) -> TelescopeReport {
    let order = par.order();
    let composed = sym.ring().compose(&sym.minus_lambda(), &par.sum(), order + 2);
    let residual = composed.sub(&Symbol::one());
    let top = residual.top_degree();
    TelescopeReport { exact: top.is_none_or(|d| d < -(order as i32)), residual_top_degree: top }
}
