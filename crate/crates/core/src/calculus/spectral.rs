use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::CalculusError;
use crate::graded::Mat;

/// Eigen-decomposition of a Hermitian matrix, computed block by block so that
/// the eigenvectors respect the `N⁺ | N⁻` splitting.
#[derive(Clone, Debug)]
pub struct Eigenbasis {
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors.
    pub vectors: Mat<Complex64>,
}

impl Eigenbasis {
    pub fn new(p: &Mat<Complex64>, split: usize) -> Result<Self, CalculusError> {
        let n = p.rows();
        let mut values = Vec::with_capacity(n);
        let mut vectors = Mat::zeros(n, n);
        let blocks = if split == 0 || split == n { vec![(0, n)] } else { vec![(0, split), (split, n - split)] };
        for (start, len) in blocks {
            let block = p.submatrix(start, start, len, len).to_nalgebra();
            let eig = SymmetricEigen::try_new(block, 1e-15, 10_000).ok_or(CalculusError::EigenFailure)?;
            let mut order: Vec<usize> = (0..len).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            for (col, &k) in order.iter().enumerate() {
                values.push(eig.eigenvalues[k]);
                for r in 0..len {
                    vectors[(start + r, start + col)] = eig.eigenvectors[(r, k)];
                }
            }
        }
        Ok(Eigenbasis { values, vectors })
    }

    /// `V·diag(f(μ))·V†`.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> Mat<Complex64> {
        let n = self.values.len();
        let d: Vec<Complex64> = self.values.iter().map(|&x| f(x)).collect();
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * d[j]);
        scaled.matmul(&self.vectors.adjoint())
    }

    pub fn to_eigen(&self, m: &Mat<Complex64>) -> Mat<Complex64> {
        self.vectors.adjoint().matmul(m).matmul(&self.vectors)
    }

    pub fn from_eigen(&self, m: &Mat<Complex64>) -> Mat<Complex64> {
        self.vectors.matmul(m).matmul(&self.vectors.adjoint())
    }
}

/// Distinct eigenvalues with their spectral projectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<Mat<Complex64>>,
}

impl SpectralDecomposition {
    /// Groups eigenvalues closer than `tol·max|μ|`.
    pub fn from_eigenbasis(eb: &Eigenbasis, tol: f64) -> Self {
        let n = eb.values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eb.values[a].total_cmp(&eb.values[b]));
        let scale = eb.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for k in order {
            match groups.last_mut() {
                Some(g) if (eb.values[k] - eb.values[*g.last().unwrap()]).abs() <= tol * scale => g.push(k),
                _ => groups.push(vec![k]),
            }
        }
        let mut eigenvalues = Vec::new();
        let mut projectors = Vec::new();
        for g in groups {
            eigenvalues.push(g.iter().map(|&k| eb.values[k]).sum::<f64>() / g.len() as f64);
            let proj = Mat::from_fn(n, n, |i, j| {
                g.iter().map(|&k| eb.vectors[(i, k)] * eb.vectors[(j, k)].conj()).sum()
            });
            projectors.push(proj);
        }
        SpectralDecomposition { eigenvalues, projectors }
    }

    pub fn reconstruct(&self) -> Mat<Complex64> {
        let n = self.projectors.first().map_or(0, Mat::rows);
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(Mat::zeros(n, n), |acc, (l, p)| acc.add(&p.scale(&Complex64::new(*l, 0.0))))
    }
}
