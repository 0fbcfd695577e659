use std::fmt::Debug;
use std::ops::Neg;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Num;

/// Scalar field used by the graded algebra: `Complex64` for numerics,
/// `Complex<BigRational>` for exact identity checks.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync {}

impl<T> Scalar for T where T: Clone + Debug + PartialEq + Num + Neg<Output = T> + Send + Sync {}

/// Small dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.iter().flatten().cloned().collect() }
    }

    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out: Mat<T> = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other.data[k * other.cols + j].clone();
                    let slot: &mut T = &mut out.data[i * other.cols + j];
                    *slot = slot.clone() + prod;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: &T) -> Mat<T> {
        self.map(|x| x * s.clone())
    }

    pub fn neg(&self) -> Mat<T> {
        self.map(|x| -x)
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().cloned().map(&mut f).collect() }
    }

    fn zip(&self, other: &Mat<T>, f: impl Fn(T, T) -> T) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a.clone(), b.clone())).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    /// Trace over the leading `split` diagonal entries minus the rest.
    pub fn supertrace(&self, split: usize) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows.min(self.cols) {
            if i < split {
                acc = acc + self[(i, i)].clone();
            } else {
                acc = acc - self[(i, i)].clone();
            }
        }
        acc
    }

    /// Block-diagonal part with respect to the split `split | n - split`.
    pub fn even_part(&self, split: usize) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            if (i < split) == (j < split) { self[(i, j)].clone() } else { T::zero() }
        })
    }

    /// Off-diagonal blocks with respect to the split.
    pub fn odd_part(&self, split: usize) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            if (i < split) != (j < split) { self[(i, j)].clone() } else { T::zero() }
        })
    }

    /// `Γ M Γ` with `Γ = diag(1, -1)`: flips the sign of the odd blocks.
    pub fn parity_conjugate(&self, split: usize) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |i, j| {
            let v = self[(i, j)].clone();
            if (i < split) == (j < split) { v } else { -v }
        })
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat<T> {
        Mat::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Mat<T>) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat<Complex64> {
    pub fn adjoint(&self) -> Mat<Complex64> {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<Complex64>> =
            rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Mat::from_rows(&rows)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.sub(&self.adjoint()).max_abs() <= tol
    }
}
