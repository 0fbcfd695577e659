use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::divided::{DividedDifferences, Exponential, NodeFunction, Power, RecursiveDd, SimplexDd};
use super::quad::{compositions, gauss_legendre};
use super::spectral::{Eigenbasis, SpectralDecomposition};
use super::CalculusError;
use crate::graded::{CForm, Mat, MultiIndex};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `Q = P + Q₊` with `P` positive Hermitian of form degree 0 and `Q₊`
/// nilpotent (all terms of form degree ≥ 1).
#[derive(Clone, Debug)]
pub struct GradedOperator {
    p: Mat<Complex64>,
    qplus: CForm,
    order: u32,
    eig: Eigenbasis,
}

/// Evaluation route for the Duhamel series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveMethod {
    ExactDividedDifferences,
    SimplexQuadrature,
}

/// Positively oriented rectangle with vertices `ε ± iβ_c`, `R ± iβ_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub epsilon: f64,
    pub height: f64,
    pub right_edge: f64,
    pub points_per_edge: usize,
}

impl GradedOperator {
    pub fn new(p: Mat<Complex64>, qplus: CForm, order: u32) -> Result<Self, CalculusError> {
        let n = qplus.dim();
        if p.rows() != n || p.cols() != n {
            return Err(CalculusError::Shape);
        }
        let scale = p.max_abs().max(1.0);
        if !p.is_hermitian(1e-12 * scale) {
            return Err(CalculusError::NotHermitian);
        }
        let split = qplus.plus_dim();
        if qplus.minus_dim() > 0 && p.odd_part(split).max_abs() > 1e-14 * scale {
            return Err(CalculusError::OddDegreeZero);
        }
        if qplus.term(MultiIndex::EMPTY).is_some_and(|m| m.max_abs() > 0.0) {
            return Err(CalculusError::DegreeZeroInQplus);
        }
        if order == 0 {
            return Err(CalculusError::ZeroOrder);
        }
        let p = p.even_part(split);
        let eig = Eigenbasis::new(&p, split)?;
        if eig.values.iter().any(|&v| v <= 0.0) {
            return Err(CalculusError::NotPositive(eig.values[0]));
        }
        let qplus = qplus.positive_part();
        Ok(GradedOperator { p, qplus, order, eig })
    }

    pub fn p(&self) -> &Mat<Complex64> {
        &self.p
    }

    pub fn qplus(&self) -> &CForm {
        &self.qplus
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn spectral_decomposition(&self) -> SpectralDecomposition {
        SpectralDecomposition::from_eigenbasis(&self.eig, 1e-12)
    }

    fn shape(&self) -> (usize, usize, usize) {
        self.qplus.shape()
    }

    fn scalar(&self, m: Mat<Complex64>) -> Result<CForm, CalculusError> {
        let (b, np, nm) = self.shape();
        Ok(CForm::scalar(b, np, nm, m)?)
    }

    pub fn identity_form(&self) -> Result<CForm, CalculusError> {
        let (b, np, nm) = self.shape();
        Ok(CForm::identity(b, np, nm)?)
    }

    /// The full form `P + Q₊`.
    pub fn full(&self) -> Result<CForm, CalculusError> {
        Ok(self.scalar(self.p.clone())?.add(&self.qplus)?)
    }

    /// `(Q − λ)^{−1}` as a finite Neumann series.
    pub fn resolvent(&self, lambda: Complex64) -> Result<CForm, CalculusError> {
        let scale = self.eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if self.eig.values.iter().any(|&m| (c(m) - lambda).norm() <= 1e-13 * scale) {
            return Err(CalculusError::Singular { re: lambda.re, im: lambda.im });
        }
        let r0 = self.scalar(self.eig.apply(|m| 1.0 / (c(m) - lambda)))?;
        let x = self.qplus.wedge_compose(&r0)?;
        let series = neumann(&x, self.shape().0)?;
        Ok(r0.wedge_compose(&series)?)
    }

    fn apply<F: NodeFunction>(&self, f: F) -> Result<CForm, CalculusError> {
        let mut dd = RecursiveDd::new(f, self.eig.values.clone());
        functional_chain(&self.eig, &self.qplus, &mut dd)
    }

    /// `Q^{−s}` by divided differences of `λ^{−s}` in the eigenbasis of `P`.
    pub fn complex_power(&self, s: Complex64) -> Result<CForm, CalculusError> {
        self.apply(Power { exponent: -s })
    }

    /// `Q^{−s}` after integrating the contour representation by parts `n`
    /// times: confluent divided differences of `λ^{n−s}`.
    pub fn by_parts_power(&self, s: Complex64, n: usize) -> Result<CForm, CalculusError> {
        if n == 0 {
            return self.complex_power(s);
        }
        if (1..=n).any(|j| (s - j as f64).norm() < 1e-14) {
            return Err(CalculusError::ByPartsPole { s_re: s.re, n });
        }
        // n!/∏_{j=1}^{n}(j − s)
        let coef = (1..=n).fold(c(1.0), |acc, j| acc * (j as f64) / (c(j as f64) - s));
        let g = Power { exponent: c(n as f64) - s };
        let mut dd = ConfluentDd { inner: RecursiveDd::new(g, self.eig.values.clone()), n, coef };
        functional_chain(&self.eig, &self.qplus, &mut dd)
    }

    /// `Q^{1/m} := Q·Q^{−1+1/m}`.
    pub fn mth_root(&self, m: u32) -> Result<CForm, CalculusError> {
        if m == 0 {
            return Err(CalculusError::ZeroOrder);
        }
        let x = self.complex_power(c(1.0 - 1.0 / m as f64))?;
        Ok(self.full()?.wedge_compose(&x)?)
    }

    /// `Q^{1/m}` split into its spectral degree-0 part and the nilpotent rest.
    fn root_parts(&self, m: u32) -> Result<(Eigenbasis, CForm), CalculusError> {
        let root = self.mth_root(m)?;
        let eb = Eigenbasis {
            values: self.eig.values.iter().map(|v| v.powf(1.0 / m as f64)).collect(),
            vectors: self.eig.vectors.clone(),
        };
        Ok((eb, root.positive_part()))
    }

    /// `e^{−itQ^{1/m}}` by the Duhamel series over simplices.
    pub fn wave_duhamel(&self, m: u32, t: f64, method: WaveMethod) -> Result<CForm, CalculusError> {
        let (eb, splus) = self.root_parts(m)?;
        let f = Exponential { rate: -I * t };
        match method {
            WaveMethod::ExactDividedDifferences => {
                let mut dd = RecursiveDd::new(f, eb.values.clone());
                functional_chain(&eb, &splus, &mut dd)
            }
            WaveMethod::SimplexQuadrature => {
                let mut dd = SimplexDd::new(f, eb.values.clone(), 1e-8, 40);
                functional_chain(&eb, &splus, &mut dd)
            }
        }
    }

    /// `e^{−it√Q} = Q ∫_{Λ_R} e^{−itμ} μ^{−2} (√Q − μ)^{−1} đμ` with composite
    /// Gauss–Legendre panels on each edge.
    pub fn wave_contour(&self, t: f64, spec: &ContourSpec) -> Result<CForm, CalculusError> {
        if spec.points_per_edge < 64 {
            return Err(CalculusError::ContourResolution(spec.points_per_edge));
        }
        let (eb, splus) = self.root_parts(2)?;
        let lo = eb.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eb.values.iter().cloned().fold(0.0, f64::max);
        if !(spec.epsilon > 0.0 && spec.epsilon < lo && spec.right_edge > hi && spec.height > 0.0) {
            return Err(CalculusError::ContourCollision { epsilon: spec.epsilon, right: spec.right_edge, low: lo, high: hi });
        }
        let (b, np, nm) = self.shape();
        // work in the eigenbasis of √P, where its resolvent is diagonal
        let mut sp_eig = CForm::zero(b, np, nm)?;
        for (k, v) in splus.terms() {
            sp_eig = sp_eig.with_index(*k, eb.to_eigen(v))?;
        }
        let corners = [
            Complex64::new(spec.epsilon, -spec.height),
            Complex64::new(spec.right_edge, -spec.height),
            Complex64::new(spec.right_edge, spec.height),
            Complex64::new(spec.epsilon, spec.height),
        ];
        const PANEL: usize = 16;
        let (gx, gw) = gauss_legendre(PANEL);
        let panels = spec.points_per_edge.div_ceil(PANEL);
        let mut acc = CForm::zero(b, np, nm)?;
        for e in 0..4 {
            let (z0, z1) = (corners[e], corners[(e + 1) % 4]);
            let dz = (z1 - z0) / panels as f64;
            for p in 0..panels {
                let a = z0 + dz * p as f64;
                for (x, w) in gx.iter().zip(&gw) {
                    let mu = a + dz * (0.5 * (x + 1.0));
                    let dmu = dz * (0.5 * w);
                    let diag: Vec<Complex64> = eb.values.iter().map(|&v| 1.0 / (c(v) - mu)).collect();
                    let r0 = CForm::scalar(b, np, nm, Mat::diag(&diag))?;
                    let x_form = sp_eig.wedge_compose(&r0)?;
                    let res = r0.wedge_compose(&neumann(&x_form, b)?)?;
                    let weight = (-I * t * mu).exp() / (mu * mu) * dmu * I / (2.0 * PI);
                    acc = acc.add(&res.scale(&weight))?;
                }
            }
        }
        let mut integral = CForm::zero(b, np, nm)?;
        for (k, v) in acc.terms() {
            integral = integral.with_index(*k, eb.from_eigen(v))?;
        }
        Ok(self.full()?.wedge_compose(&integral)?)
    }

    /// `e^{−tQ}` by divided differences of `e^{−tλ}`.
    pub fn heat(&self, t: f64) -> Result<CForm, CalculusError> {
        if !(t > 0.0) {
            return Err(CalculusError::NonPositiveTime(t));
        }
        self.apply(Exponential { rate: c(-t) })
    }

    /// `e^{−tQ}` by the Volterra (Duhamel) series with simplex quadrature.
    pub fn heat_volterra(&self, t: f64) -> Result<CForm, CalculusError> {
        if !(t > 0.0) {
            return Err(CalculusError::NonPositiveTime(t));
        }
        let mut dd = SimplexDd::new(Exponential { rate: c(-t) }, self.eig.values.clone(), 1e-13, 60);
        functional_chain(&self.eig, &self.qplus, &mut dd)
    }
}

/// `Σ_k (−x)^k`, finite because `x` is nilpotent of depth `β`.
fn neumann(x: &CForm, beta: usize) -> Result<CForm, CalculusError> {
    let (b, np, nm) = x.shape();
    let id = CForm::identity(b, np, nm)?;
    let mut sum = id.clone();
    let mut power = id;
    let minus_x = x.neg();
    for _ in 0..beta {
        power = power.wedge_compose(&minus_x)?;
        if power.is_zero() {
            break;
        }
        sum = sum.add(&power)?;
    }
    Ok(sum)
}

/// Confluent divided differences used by the by-parts representation:
/// `coef · Σ_{n_0+…+n_k=n} g[μ_0^{(n_0+1)}, …, μ_k^{(n_k+1)}]`.
struct ConfluentDd<F> {
    inner: RecursiveDd<F>,
    n: usize,
    coef: Complex64,
}

impl<F: NodeFunction> DividedDifferences for ConfluentDd<F> {
    fn dd(&mut self, idx: &[usize]) -> Result<Complex64, CalculusError> {
        let mut sum = Complex64::new(0.0, 0.0);
        for comp in compositions(self.n, idx.len()) {
            let mut nodes = Vec::with_capacity(idx.len() + self.n);
            for (&i, &r) in idx.iter().zip(&comp) {
                nodes.extend(std::iter::repeat_n(i, r + 1));
            }
            sum += self.inner.dd(&nodes)?;
        }
        Ok(sum * self.coef)
    }
}

struct ChainItem {
    mask: MultiIndex,
    odd: bool,
    mat: Mat<Complex64>,
}

/// `f(P + X₊) = Σ_k Σ_{I_1…I_k} ± (X_{I_1}…X_{I_k})_{f[μ…]}`: the Daleckii–Krein
/// expansion in the eigenbasis, one divided difference per index path.
pub(crate) fn functional_chain<D: DividedDifferences>(
    eb: &Eigenbasis,
    positive: &CForm,
    dd: &mut D,
) -> Result<CForm, CalculusError> {
    let (b, np, nm) = positive.shape();
    let n = np + nm;
    let mut items = Vec::new();
    for (k, v) in positive.terms() {
        if k.degree() == 0 {
            continue;
        }
        let e = eb.to_eigen(v);
        if nm > 0 {
            for (odd, part) in [(false, e.even_part(np)), (true, e.odd_part(np))] {
                if !part.is_zero() {
                    items.push(ChainItem { mask: *k, odd, mat: part });
                }
            }
        } else if !e.is_zero() {
            items.push(ChainItem { mask: *k, odd: false, mat: e });
        }
    }

    let mut out = CForm::zero(b, np, nm)?;
    let mut diag = Mat::zeros(n, n);
    for a in 0..n {
        diag[(a, a)] = dd.dd(&[a])?;
    }
    out = out.with_index(MultiIndex::EMPTY, eb.from_eigen(&diag))?;

    let mut seq = Vec::new();
    extend_sequences(&items, MultiIndex::EMPTY, false, 1, &mut seq, &mut |mask, sign, seq| {
        let mats: Vec<&Mat<Complex64>> = seq.iter().map(|&i| &items[i].mat).collect();
        let mut t = chain_matrix(&mats, n, dd)?;
        if sign < 0 {
            t = t.neg();
        }
        out = out.clone().with_index(mask, eb.from_eigen(&t))?;
        Ok(())
    })?;
    Ok(out)
}

type Visit<'a> = dyn FnMut(MultiIndex, i32, &[usize]) -> Result<(), CalculusError> + 'a;

fn extend_sequences(
    items: &[ChainItem],
    mask: MultiIndex,
    parity_odd: bool,
    sign: i32,
    seq: &mut Vec<usize>,
    visit: &mut Visit<'_>,
) -> Result<(), CalculusError> {
    for (i, item) in items.iter().enumerate() {
        let Some((next, s)) = mask.wedge(item.mask) else { continue };
        // moving the accumulated matrix parity past the new form factor
        let koszul = if parity_odd && item.mask.degree() % 2 == 1 { -1 } else { 1 };
        let sign = sign * s * koszul;
        seq.push(i);
        visit(next, sign, seq)?;
        extend_sequences(items, next, parity_odd ^ item.odd, sign, seq, visit)?;
        seq.pop();
    }
    Ok(())
}

fn chain_matrix<D: DividedDifferences>(
    mats: &[&Mat<Complex64>],
    n: usize,
    dd: &mut D,
) -> Result<Mat<Complex64>, CalculusError> {
    let mut out = Mat::zeros(n, n);
    let mut path = Vec::with_capacity(mats.len() + 1);
    for a in 0..n {
        path.clear();
        path.push(a);
        walk(mats, 0, a, c(1.0), &mut path, &mut out, dd)?;
    }
    Ok(out)
}

fn walk<D: DividedDifferences>(
    mats: &[&Mat<Complex64>],
    level: usize,
    cur: usize,
    weight: Complex64,
    path: &mut Vec<usize>,
    out: &mut Mat<Complex64>,
    dd: &mut D,
) -> Result<(), CalculusError> {
    if level == mats.len() {
        let v = dd.dd(path)?;
        out[(path[0], cur)] += weight * v;
        return Ok(());
    }
    let m = mats[level];
    for next in 0..m.cols() {
        let e = m[(cur, next)];
        if e == c(0.0) {
            continue;
        }
        path.push(next);
        walk(mats, level + 1, next, weight * e, path, out, dd)?;
        path.pop();
    }
    Ok(())
}
