use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{LengthEntry, SpectraError, SpectrumEntry};
use crate::symbol::NumericTrig;

pub(crate) fn check_positive(w: &NumericTrig) -> Result<(), SpectraError> {
    let bound = w.min_lower_bound(512 * (w.max_frequency() as usize + 1));
    if bound <= 0.0 {
        return Err(SpectraError::NonPositiveMetric(bound));
    }
    Ok(())
}

/// `L = ∫₀^{2π} w^{−1/2} dx`, periodic trapezoid doubled to round-off.
pub fn circle_length(w: &NumericTrig) -> Result<f64, SpectraError> {
    check_positive(w)?;
    let trap = |n: usize| {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|i| w.eval_real(i as f64 * h).powf(-0.5)).sum::<f64>() * h
    };
    let mut n = (16 * (w.max_frequency() as usize + 1)).next_power_of_two();
    let mut prev = trap(n);
    loop {
        n *= 2;
        let cur = trap(n);
        if (cur - prev).abs() <= 1e-14 * cur || n >= 1 << 20 {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// `λ_n = (2πn/L)²` up to `cutoff`, multiplicity 2 for `n ≥ 1`.
pub fn circle_spectrum(w: &NumericTrig, cutoff: f64) -> Result<SpectrumEntry, SpectraError> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(SpectraError::Cutoff);
    }
    let l = circle_length(w)?;
    let step = 2.0 * PI / l;
    let n_max = (cutoff.sqrt() / step).floor() as usize;
    let mut eigenvalues = vec![(0.0, 1)];
    eigenvalues.extend((1..=n_max).map(|n| ((step * n as f64).powi(2), 2)));
    Ok(SpectrumEntry { b: 0.0, dim: 1, eigenvalues, cutoff })
}

/// Lengths `kL` of the closed geodesics, each traversed in two directions.
pub fn circle_lengths(w: &NumericTrig, max_length: f64) -> Result<LengthEntry, SpectraError> {
    let l = circle_length(w)?;
    let k_max = (max_length / l).floor() as usize;
    Ok(LengthEntry { b: 0.0, lengths: (1..=k_max).map(|k| (k as f64 * l, 2)).collect(), cutoff: max_length })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    /// Fourier collocation on an odd grid, spectrally accurate.
    Fourier,
    /// Second-order finite differences with midpoint metric values.
    FiniteDifference,
}

/// Lowest `count` eigenvalues of `−w∂² − (w′/2)∂` from a symmetric
/// discretisation in `L²(w^{−1/2}dx)`.
///
/// With `u = w^{1/4} v` the quadratic form is `∫ √w |∂(w^{1/4}v)|² dx`, so the
/// matrix is `CᵀC` with `C = √[4]{w} · D · √[4]{w}` for a difference matrix `D`.
pub fn circle_spectrum_numeric(
    w: &NumericTrig,
    grid_size: usize,
    count: usize,
    method: Discretization,
) -> Result<Vec<f64>, SpectraError> {
    check_positive(w)?;
    if grid_size < 8 * count {
        return Err(SpectraError::GridTooSmall { grid: grid_size, count });
    }
    let n = match method {
        Discretization::Fourier => grid_size | 1,
        Discretization::FiniteDifference => grid_size,
    };
    let h = 2.0 * PI / n as f64;
    let c = match method {
        Discretization::Fourier => {
            let quarter: Vec<f64> = (0..n).map(|i| w.eval_real(i as f64 * h).powf(0.25)).collect();
            DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    return 0.0;
                }
                let k = i as f64 - j as f64;
                let sign = if (i + n - j) % 2 == 0 { 1.0 } else { -1.0 };
                quarter[i] * 0.5 * sign / (0.5 * k * h).sin() * quarter[j]
            })
        }
        Discretization::FiniteDifference => {
            // rows: midpoints i+1/2; (u_{i+1} − u_i)/h weighted by w(x_{i+1/2})^{1/4}
            // columns: nodes, rescaled by w(x_i)^{1/4}
            let mid: Vec<f64> = (0..n).map(|i| w.eval_real((i as f64 + 0.5) * h).powf(0.25)).collect();
            let node: Vec<f64> = (0..n).map(|i| w.eval_real(i as f64 * h).powf(0.25)).collect();
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                let next = (i + 1) % n;
                m[(i, i)] = -mid[i] * node[i] / h;
                m[(i, next)] = mid[i] * node[next] / h;
            }
            m
        }
    };
    let s = c.transpose() * c;
    let mut values: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().map(|v| v.max(0.0)).collect();
    values.sort_by(f64::total_cmp);
    values.truncate(count);
    Ok(values)
}

/// Raises the grid until the first `count` eigenvalues move by less than `tol`.
pub fn circle_spectrum_converged(
    w: &NumericTrig,
    count: usize,
    tol: f64,
    method: Discretization,
) -> Result<(Vec<f64>, usize), SpectraError> {
    let mut grid = (8 * count).max(16 * (w.max_frequency() as usize + 1));
    let mut prev = circle_spectrum_numeric(w, grid, count, method)?;
    let limit = match method {
        Discretization::Fourier => 2048,
        Discretization::FiniteDifference => 4096,
    };
    loop {
        let next_grid = grid * 3 / 2;
        let cur = circle_spectrum_numeric(w, next_grid, count, method)?;
        let change = prev.iter().zip(&cur).map(|(a, b)| (a - b).abs() / b.max(1.0)).fold(0.0, f64::max);
        if change < tol {
            return Ok((cur, next_grid));
        }
        if next_grid > limit {
            return Err(SpectraError::NonConvergence { grid: next_grid, change });
        }
        grid = next_grid;
        prev = cur;
    }
}
