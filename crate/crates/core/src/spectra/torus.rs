use std::f64::consts::PI;

use serde::Serialize;

use super::{group_sorted, LengthEntry, SpectraError, SpectrumEntry};

/// Largest bounding box the lattice search will scan.
pub const ENUMERATION_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeBasis {
    v1: [f64; 2],
    v2: [f64; 2],
}

impl LatticeBasis {
    pub fn new(v1: [f64; 2], v2: [f64; 2]) -> Result<Self, SpectraError> {
        let det = v1[0] * v2[1] - v1[1] * v2[0];
        let scale = (v1[0].hypot(v1[1]) * v2[0].hypot(v2[1])).max(f64::MIN_POSITIVE);
        if !(det.abs() > 1e-9 * scale) {
            return Err(SpectraError::DependentBasis(det.abs()));
        }
        Ok(LatticeBasis { v1, v2 })
    }

    pub fn vectors(&self) -> [[f64; 2]; 2] {
        [self.v1, self.v2]
    }

    pub fn covolume(&self) -> f64 {
        (self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0]).abs()
    }

    /// Basis `v*_i` with `v*_i · v_j = δ_ij`.
    pub fn dual(&self) -> LatticeBasis {
        let det = self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0];
        LatticeBasis { v1: [self.v2[1] / det, -self.v2[0] / det], v2: [-self.v1[1] / det, self.v1[0] / det] }
    }

    fn point(&self, m1: i64, m2: i64) -> [f64; 2] {
        [m1 as f64 * self.v1[0] + m2 as f64 * self.v2[0], m1 as f64 * self.v1[1] + m2 as f64 * self.v2[1]]
    }

    /// Every nonzero `|m₁v₁ + m₂v₂| ≤ radius`.
    ///
    /// `|m_i| ≤ radius·√(G^{−1})_{ii}` for the Gram matrix `G`, since `m_i` is
    /// the `i`-th row of `B^{−1}` applied to the point, so the box is complete.
    pub fn norms_within(&self, radius: f64) -> Result<Vec<f64>, SpectraError> {
        let g11 = self.v1[0].powi(2) + self.v1[1].powi(2);
        let g22 = self.v2[0].powi(2) + self.v2[1].powi(2);
        let g12 = self.v1[0] * self.v2[0] + self.v1[1] * self.v2[1];
        let det = g11 * g22 - g12 * g12;
        let b1 = (radius * (g22 / det).sqrt()).floor() as i64;
        let b2 = (radius * (g11 / det).sqrt()).floor() as i64;
        let points = (2 * b1 as u64 + 1) * (2 * b2 as u64 + 1);
        if points > ENUMERATION_BUDGET {
            return Err(SpectraError::CutoffTooLarge { points, budget: ENUMERATION_BUDGET });
        }
        let r2 = radius * radius;
        let mut out = Vec::new();
        for m1 in -b1..=b1 {
            for m2 in -b2..=b2 {
                if m1 == 0 && m2 == 0 {
                    continue;
                }
                let p = self.point(m1, m2);
                let n2 = p[0] * p[0] + p[1] * p[1];
                if n2 <= r2 {
                    out.push(n2.sqrt());
                }
            }
        }
        Ok(out)
    }
}

/// `4π²|m*|²` over the dual lattice, up to `cutoff`.
pub fn torus_spectrum(basis: &LatticeBasis, cutoff: f64) -> Result<SpectrumEntry, SpectraError> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(SpectraError::Cutoff);
    }
    let radius = cutoff.sqrt() / (2.0 * PI);
    let mut values: Vec<f64> = basis.dual().norms_within(radius)?.into_iter().map(|r| (2.0 * PI * r).powi(2)).collect();
    values.push(0.0);
    Ok(SpectrumEntry { b: 0.0, dim: 2, eigenvalues: group_sorted(values), cutoff })
}

/// Closed-geodesic lengths `|m₁v₁ + m₂v₂| ≤ max_length`.
pub fn torus_lengths(basis: &LatticeBasis, max_length: f64) -> Result<LengthEntry, SpectraError> {
    Ok(LengthEntry { b: 0.0, lengths: group_sorted(basis.norms_within(max_length)?), cutoff: max_length })
}
