//! Fibre eigenvalue and closed-geodesic length tables for metric circles
//! and flat tori.

mod circle;
mod torus;

use rayon::prelude::*;
use serde::Serialize;

pub use circle::{
    circle_length, circle_lengths, circle_spectrum, circle_spectrum_converged, circle_spectrum_numeric, Discretization,
};
pub use torus::{torus_lengths, torus_spectrum, LatticeBasis, ENUMERATION_BUDGET};

use crate::symbol::TrigPoly;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error("metric coefficient is not positive (certified lower bound {0:e})")]
    NonPositiveMetric(f64),
    #[error("lattice basis is degenerate (|det| = {0:e})")]
    DependentBasis(f64),
    #[error("enumeration needs {points} lattice points, budget is {budget}")]
    CutoffTooLarge { points: u64, budget: u64 },
    #[error("grid of {grid} points cannot resolve {count} eigenvalues")]
    GridTooSmall { grid: usize, count: usize },
    #[error("eigenvalues did not settle: last change {change:e} on grid {grid}")]
    NonConvergence { grid: usize, change: f64 },
    #[error("base grid must be non-empty and increasing")]
    BaseGrid,
    #[error("cutoff must be positive and finite")]
    Cutoff,
}

/// Sorted values with multiplicities.
pub type Multiset = Vec<(f64, usize)>;

/// Groups sorted values that agree to a relative `1e-12`.
pub(crate) fn group_sorted(mut values: Vec<f64>) -> Multiset {
    values.sort_by(f64::total_cmp);
    let mut out: Multiset = Vec::new();
    for v in values {
        match out.last_mut() {
            Some((last, m)) if (v - *last).abs() <= 1e-12 * last.abs().max(1.0) => *m += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub b: f64,
    /// Fibre dimension, used for Weyl-law tail bounds.
    pub dim: usize,
    pub eigenvalues: Multiset,
    pub cutoff: f64,
}

impl SpectrumEntry {
    /// Eigenvalues without the `b` label, e.g. for oracle checks.
    pub fn from_values(values: Vec<f64>, dim: usize, cutoff: f64) -> Self {
        SpectrumEntry { b: 0.0, dim, eigenvalues: group_sorted(values), cutoff }
    }

    pub fn count(&self) -> usize {
        self.eigenvalues.iter().map(|(_, m)| m).sum()
    }

    pub fn counting(&self, lambda: f64) -> usize {
        self.eigenvalues.iter().take_while(|(v, _)| *v <= lambda).map(|(_, m)| m).sum()
    }

    /// Ratio of the eigenvalue count to the Weyl prediction at the cutoff.
    pub fn weyl_ratio(&self, volume: f64) -> f64 {
        let predicted = match self.dim {
            1 => volume / std::f64::consts::PI * self.cutoff.sqrt(),
            _ => volume / (4.0 * std::f64::consts::PI) * self.cutoff,
        };
        self.count() as f64 / predicted
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthEntry {
    pub b: f64,
    pub lengths: Multiset,
    pub cutoff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub entries: Vec<SpectrumEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicLengthTable {
    pub entries: Vec<LengthEntry>,
}

impl GeodesicLengthTable {
    /// `(grid index, length index)` pairs where two distinct lengths come
    /// within `tol` of each other, so peak tracks cannot be told apart.
    pub fn near_crossings(&self, tol: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            for (k, pair) in e.lengths.windows(2).enumerate() {
                if pair[1].0 - pair[0].0 < tol {
                    out.push((i, k));
                }
            }
        }
        out
    }
}

fn check_grid(grid: &[f64]) -> Result<(), SpectraError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectraError::BaseGrid);
    }
    Ok(())
}

/// Metric circles `w_b` over a base grid.
#[derive(Clone, Debug)]
pub struct MetricCircleFamily {
    members: Vec<(f64, TrigPoly)>,
}

impl MetricCircleFamily {
    pub fn new(grid: &[f64], w_of_b: impl Fn(f64) -> TrigPoly) -> Result<Self, SpectraError> {
        check_grid(grid)?;
        let members: Vec<(f64, TrigPoly)> = grid.iter().map(|&b| (b, w_of_b(b))).collect();
        for (_, w) in &members {
            circle::check_positive(&w.numeric())?;
        }
        Ok(MetricCircleFamily { members })
    }

    pub fn members(&self) -> &[(f64, TrigPoly)] {
        &self.members
    }

    pub fn spectra(&self, cutoff: f64) -> Result<SpectrumTable, SpectraError> {
        let entries = self
            .members
            .par_iter()
            .map(|(b, w)| circle_spectrum(&w.numeric(), cutoff).map(|e| SpectrumEntry { b: *b, ..e }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SpectrumTable { entries })
    }

    pub fn lengths(&self, max_length: f64) -> Result<GeodesicLengthTable, SpectraError> {
        let entries = self
            .members
            .par_iter()
            .map(|(b, w)| circle_lengths(&w.numeric(), max_length).map(|e| LengthEntry { b: *b, ..e }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GeodesicLengthTable { entries })
    }
}

/// Flat tori `ℝ²/Λ_b` over a base grid.
#[derive(Clone, Debug)]
pub struct FlatTorusFamily {
    members: Vec<(f64, LatticeBasis)>,
}

impl FlatTorusFamily {
    pub fn new(grid: &[f64], basis_of_b: impl Fn(f64) -> [[f64; 2]; 2]) -> Result<Self, SpectraError> {
        check_grid(grid)?;
        let members = grid
            .iter()
            .map(|&b| {
                let [v1, v2] = basis_of_b(b);
                LatticeBasis::new(v1, v2).map(|l| (b, l))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FlatTorusFamily { members })
    }

    pub fn members(&self) -> &[(f64, LatticeBasis)] {
        &self.members
    }

    pub fn spectra(&self, cutoff: f64) -> Result<SpectrumTable, SpectraError> {
        let entries = self
            .members
            .par_iter()
            .map(|(b, l)| torus_spectrum(l, cutoff).map(|e| SpectrumEntry { b: *b, ..e }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SpectrumTable { entries })
    }

    pub fn lengths(&self, max_length: f64) -> Result<GeodesicLengthTable, SpectraError> {
        let entries = self
            .members
            .par_iter()
            .map(|(b, l)| torus_lengths(l, max_length).map(|e| LengthEntry { b: *b, ..e }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GeodesicLengthTable { entries })
    }
}
