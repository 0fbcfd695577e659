use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{GradedError, Mat, MultiIndex, Scalar, MAX_BASE_DIM};

/// Element of `Λ(ℝ^β) ⊗ End(ℂ^{N⁺|N⁻})`.
///
/// Products follow the super tensor sign rule
/// `(ω⊗A)(η⊗B) = (−1)^{|A||η|} (ω∧η) ⊗ AB`, where `|A|` is the matrix parity
/// (block-diagonal even, off-diagonal odd). With `N⁻ = 0` every matrix is even
/// and the rule reduces to the plain wedge product with ordered matrix factors.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMatrixForm<T> {
    beta: usize,
    plus: usize,
    minus: usize,
    terms: BTreeMap<MultiIndex, Mat<T>>,
}

impl<T: Scalar> GradedMatrixForm<T> {
    pub fn zero(beta: usize, plus: usize, minus: usize) -> Result<Self, GradedError> {
        if beta > MAX_BASE_DIM {
            return Err(GradedError::BaseDimTooLarge(beta));
        }
        if plus + minus == 0 {
            return Err(GradedError::EmptyFibre);
        }
        Ok(GradedMatrixForm { beta, plus, minus, terms: BTreeMap::new() })
    }

    pub fn identity(beta: usize, plus: usize, minus: usize) -> Result<Self, GradedError> {
        Self::scalar(beta, plus, minus, Mat::identity(plus + minus))
    }

    /// Degree-0 form with the given matrix.
    pub fn scalar(beta: usize, plus: usize, minus: usize, m: Mat<T>) -> Result<Self, GradedError> {
        Self::zero(beta, plus, minus)?.with_term(&[], m)
    }

    /// Adds `db_{labels} ⊗ m`; labels may come in any order and the sorting
    /// sign is absorbed into the stored matrix.
    pub fn with_term(mut self, labels: &[usize], m: Mat<T>) -> Result<Self, GradedError> {
        let (idx, sign) = MultiIndex::from_labels(labels, self.beta)?;
        self.check_matrix(&m)?;
        let m = if sign < 0 { m.neg() } else { m };
        self.accumulate(idx, m);
        Ok(self)
    }

    pub fn with_index(mut self, idx: MultiIndex, m: Mat<T>) -> Result<Self, GradedError> {
        if !idx.fits(self.beta) {
            return Err(GradedError::LabelOutOfRange { label: idx.labels().last().copied().unwrap_or(0), beta: self.beta });
        }
        self.check_matrix(&m)?;
        self.accumulate(idx, m);
        Ok(self)
    }

    fn check_matrix(&self, m: &Mat<T>) -> Result<(), GradedError> {
        let n = self.dim();
        if m.rows() != n || m.cols() != n {
            return Err(GradedError::MatrixShape { expected: n, rows: m.rows(), cols: m.cols() });
        }
        Ok(())
    }

    fn accumulate(&mut self, idx: MultiIndex, m: Mat<T>) {
        match self.terms.get_mut(&idx) {
            Some(existing) => *existing = existing.add(&m),
            None => {
                self.terms.insert(idx, m);
            }
        }
    }

    pub fn base_dim(&self) -> usize {
        self.beta
    }

    pub fn plus_dim(&self) -> usize {
        self.plus
    }

    pub fn minus_dim(&self) -> usize {
        self.minus
    }

    pub fn dim(&self) -> usize {
        self.plus + self.minus
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.beta, self.plus, self.minus)
    }

    pub fn term(&self, idx: MultiIndex) -> Option<&Mat<T>> {
        self.terms.get(&idx)
    }

    /// Matrix at `idx`, zero when absent.
    pub fn coefficient(&self, idx: MultiIndex) -> Mat<T> {
        self.terms.get(&idx).cloned().unwrap_or_else(|| Mat::zeros(self.dim(), self.dim()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Mat<T>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(Mat::is_zero)
    }

    /// Drops stored terms whose matrix is identically zero.
    pub fn pruned(mut self) -> Self {
        self.terms.retain(|_, m| !m.is_zero());
        self
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|k| k.degree()).max().unwrap_or(0)
    }

    pub fn degree_part(&self, d: usize) -> Self {
        self.filter(|idx| idx.degree() == d)
    }

    /// Terms of form degree at least 1.
    pub fn positive_part(&self) -> Self {
        self.filter(|idx| idx.degree() > 0)
    }

    fn filter(&self, keep: impl Fn(MultiIndex) -> bool) -> Self {
        let terms = self.terms.iter().filter(|(k, _)| keep(**k)).map(|(k, v)| (*k, v.clone())).collect();
        GradedMatrixForm { terms, ..self.empty_like() }
    }

    fn empty_like(&self) -> Self {
        GradedMatrixForm { beta: self.beta, plus: self.plus, minus: self.minus, terms: BTreeMap::new() }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), GradedError> {
        if self.shape() != other.shape() {
            return Err(GradedError::DimensionMismatch { left: self.shape(), right: other.shape() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, GradedError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.accumulate(*k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GradedError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_terms(|_, m| m.neg())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map_terms(|_, m| m.scale(s))
    }

    fn map_terms(&self, f: impl Fn(MultiIndex, &Mat<T>) -> Mat<T>) -> Self {
        let terms = self.terms.iter().map(|(k, v)| (*k, f(*k, v))).collect();
        GradedMatrixForm { terms, ..self.empty_like() }
    }

    /// Converts the scalar type term by term.
    pub fn map_scalars<U: Scalar>(&self, f: impl Fn(&T) -> U) -> GradedMatrixForm<U> {
        let terms = self.terms.iter().map(|(k, v)| (*k, Mat::from_fn(v.rows(), v.cols(), |i, j| f(&v[(i, j)])))).collect();
        GradedMatrixForm { beta: self.beta, plus: self.plus, minus: self.minus, terms }
    }

    /// Graded product; see the type-level docs for the sign rule.
    pub fn wedge_compose(&self, other: &Self) -> Result<Self, GradedError> {
        self.check_compatible(other)?;
        let mut out = self.empty_like();
        for (i, a) in &self.terms {
            // A_even + (−1)^{|J|} A_odd, cached for the two parities of J
            let a_flipped = if self.minus > 0 { Some(a.parity_conjugate(self.plus)) } else { None };
            for (j, b) in &other.terms {
                let Some((k, sign)) = i.wedge(*j) else { continue };
                let left = match (&a_flipped, j.degree() % 2) {
                    (Some(f), 1) => f,
                    _ => a,
                };
                let prod = left.matmul(b);
                out.accumulate(k, if sign < 0 { prod.neg() } else { prod });
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Result<Self, GradedError> {
        let mut acc = Self::identity(self.beta, self.plus, self.minus)?;
        for _ in 0..k {
            acc = acc.wedge_compose(self)?;
        }
        Ok(acc)
    }

    /// Per multi-index supertrace: `tr_{N⁺} − tr_{N⁻}`.
    pub fn supertrace(&self) -> BTreeMap<MultiIndex, T> {
        self.terms.iter().map(|(k, v)| (*k, v.supertrace(self.plus))).collect()
    }

    /// `δ_t`: scales the degree-j component by `t^{−j}`.
    pub fn delta_t_rescale(&self, t: &T) -> Result<Self, GradedError> {
        self.rescale_by_degree(t, 0)
    }

    /// `t·δ_t∘x∘δ_t^{−1}` on operator-valued forms: degree k scales by `t^{−k+1}`.
    pub fn conjugation_rescale(&self, t: &T) -> Result<Self, GradedError> {
        self.rescale_by_degree(t, 1)
    }

    fn rescale_by_degree(&self, t: &T, shift: usize) -> Result<Self, GradedError> {
        if t.is_zero() {
            return Err(GradedError::ZeroRescale);
        }
        let inv = T::one() / t.clone();
        Ok(self.map_terms(|k, m| {
            let d = k.degree();
            let factor = if d >= shift {
                power(&inv, d - shift)
            } else {
                power(t, shift - d)
            };
            m.scale(&factor)
        }))
    }

    /// Component of total parity `p` (form degree plus matrix parity, mod 2).
    pub fn parity_part(&self, p: usize) -> Self {
        let mut out = self.empty_like();
        for (k, v) in &self.terms {
            let piece = if (k.degree() + p) % 2 == 0 { v.even_part(self.plus) } else { v.odd_part(self.plus) };
            out.accumulate(*k, piece);
        }
        out
    }

    /// Graded commutator `[x, y] = xy − (−1)^{|x||y|} yx`, extended bilinearly
    /// over the parity decomposition.
    pub fn supercommutator(&self, other: &Self) -> Result<Self, GradedError> {
        self.check_compatible(other)?;
        let mut out = self.wedge_compose(other)?;
        for px in 0..2 {
            let x = self.parity_part(px);
            for py in 0..2 {
                let y = other.parity_part(py);
                let yx = y.wedge_compose(&x)?;
                let yx = if px * py == 1 { yx } else { yx.neg() };
                out = out.add(&yx)?;
            }
        }
        Ok(out)
    }

    /// True when every term has odd total parity (up to exact zeros).
    pub fn is_odd(&self) -> bool {
        self.terms.iter().all(|(k, v)| {
            let wrong = if k.degree() % 2 == 0 { v.even_part(self.plus) } else { v.odd_part(self.plus) };
            wrong.is_zero()
        })
    }
}

fn power<T: Scalar>(x: &T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, _| acc * x.clone())
}

impl GradedMatrixForm<Complex64> {
    /// Largest entry modulus over all terms.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Mat::max_abs).fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self − other`.
    pub fn distance(&self, other: &Self) -> Result<f64, GradedError> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Per-degree max-abs norms, indexed by degree.
    pub fn degree_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.beta + 1];
        for (k, v) in &self.terms {
            out[k.degree()] = f64::max(out[k.degree()], v.max_abs());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> Mat<i64> {
        Mat::from_rows(rows)
    }

    #[test]
    fn wedge_example_signs() {
        let a = m(&[vec![1, 2], vec![3, 4]]);
        let b = m(&[vec![0, 1], vec![5, 7]]);
        let omega = GradedMatrixForm::zero(2, 2, 0).unwrap().with_term(&[1], a.clone()).unwrap();
        let sigma = GradedMatrixForm::zero(2, 2, 0).unwrap().with_term(&[2], b.clone()).unwrap();
        let ws = omega.wedge_compose(&sigma).unwrap();
        assert_eq!(ws.term(MultiIndex::from_mask(3)), Some(&a.matmul(&b)));
        let sw = sigma.wedge_compose(&omega).unwrap();
        assert_eq!(sw.term(MultiIndex::from_mask(3)), Some(&b.matmul(&a).neg()));
        let aa = omega.wedge_compose(&omega).unwrap();
        assert!(aa.is_zero());
    }

    #[test]
    fn rescale_examples() {
        let x = GradedMatrixForm::zero(2, 1, 0).unwrap().with_term(&[1, 2], Mat::diag(&[8.0f64.into()])).unwrap();
        let x: GradedMatrixForm<Complex64> = x;
        let r = x.delta_t_rescale(&Complex64::new(2.0, 0.0)).unwrap();
        assert_eq!(r.term(MultiIndex::from_mask(3)).unwrap()[(0, 0)], Complex64::new(2.0, 0.0));
        let c = x.conjugation_rescale(&Complex64::new(2.0, 0.0)).unwrap();
        assert_eq!(c.term(MultiIndex::from_mask(3)).unwrap()[(0, 0)], Complex64::new(4.0, 0.0));
        assert!(x.delta_t_rescale(&Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn odd_detection() {
        let odd = m(&[vec![0, 1], vec![1, 0]]);
        let even = m(&[vec![1, 0], vec![0, 2]]);
        let a = GradedMatrixForm::scalar(1, 1, 1, odd.clone()).unwrap().with_term(&[1], even.clone()).unwrap();
        assert!(a.is_odd());
        let b = GradedMatrixForm::scalar(1, 1, 1, even).unwrap();
        assert!(!b.is_odd());
    }
}
