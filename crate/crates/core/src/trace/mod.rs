//! Smoothed wave traces, peak detection and small-time heat fits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::spectra::{
    circle_spectrum, circle_spectrum_converged, Discretization, GeodesicLengthTable, Multiset, SpectraError,
    SpectrumEntry, SpectrumTable,
};
use crate::symbol::{invariant_table, LaplaceOperatorSpec, SymbolError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error("smoothing width must be positive")]
    Sigma,
    #[error("spectrum tail beyond the cutoff is {bound:e} (need < {limit:e})")]
    InsufficientCutoff { bound: f64, limit: f64 },
    #[error("time window must satisfy 0 < t_min < t_max")]
    TimeWindow,
    #[error("t-grid must be non-empty and increasing")]
    TimeGrid,
    #[error("spectrum table and length table cover different base grids")]
    GridMismatch,
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// Tail bound the smoothed trace must respect.
pub const TAIL_LIMIT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveTraceCurve {
    pub t: Vec<f64>,
    pub values: Vec<Complex64>,
    pub sigma: f64,
    pub cutoff: f64,
    pub tail_bound: f64,
}

/// Weyl-type bound on `Σ_{λ > Λ} m e^{−σ²λ}` using the count at the cutoff,
/// with a factor two of slack.
pub fn tail_bound(spec: &SpectrumEntry, sigma: f64) -> f64 {
    let cut = spec.cutoff;
    let s2 = sigma * sigma;
    let count = spec.count().max(1) as f64;
    let density = match spec.dim {
        // N(λ) ≈ count·√(λ/Λ), so dN/dλ ≤ count/(2Λ) beyond the cutoff
        1 => count / (2.0 * cut),
        _ => count / cut,
    };
    // ∫_Λ^∞ e^{−σ²λ} dN(λ)
    2.0 * density * (-s2 * cut).exp() / s2
}

/// `T(t) = Σ m e^{it√λ} e^{−σ²λ}`.
pub fn smoothed_wave_trace(spec: &SpectrumEntry, sigma: f64, t_grid: &[f64]) -> Result<WaveTraceCurve, TraceError> {
    if !(sigma > 0.0) {
        return Err(TraceError::Sigma);
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(TraceError::TimeGrid);
    }
    let bound = tail_bound(spec, sigma);
    if bound >= TAIL_LIMIT {
        return Err(TraceError::InsufficientCutoff { bound, limit: TAIL_LIMIT });
    }
    let modes: Vec<(f64, f64)> =
        spec.eigenvalues.iter().map(|&(l, m)| (l.max(0.0).sqrt(), m as f64 * (-sigma * sigma * l).exp())).collect();
    let values = t_grid
        .par_iter()
        .map(|&t| modes.iter().map(|&(root, weight)| Complex64::from_polar(weight, t * root)).sum())
        .collect();
    Ok(WaveTraceCurve { t: t_grid.to_vec(), values, sigma, cutoff: spec.cutoff, tail_bound: bound })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub t: f64,
    pub height: f64,
    /// Full width at half maximum from linear interpolation.
    pub width: f64,
    /// Matched geodesic length (`0` for the peak at the origin).
    pub matched: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub unmatched_lengths: Vec<f64>,
    pub threshold: f64,
}

impl PeakReport {
    pub fn matched(&self) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(|p| p.matched.is_some())
    }

    pub fn unmatched_peaks(&self) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(|p| p.matched.is_none())
    }

    /// Matched peak for `length`, if any.
    pub fn peak_for(&self, length: f64) -> Option<&Peak> {
        self.peaks.iter().find(|p| p.matched == Some(length))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeakSettings {
    /// Peaks must exceed this multiple of the median `|T|`.
    pub threshold_factor: f64,
    pub tolerance: f64,
}

impl PeakSettings {
    /// Threshold `5 × median`, tolerance `3σ`.
    pub fn for_sigma(sigma: f64) -> Self {
        PeakSettings { threshold_factor: 5.0, tolerance: 3.0 * sigma }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn half_width(t: &[f64], a: &[f64], i: usize, half: f64) -> f64 {
    let mut left = t[0];
    for k in (0..i).rev() {
        if a[k] < half {
            left = t[k] + (half - a[k]) / (a[k + 1] - a[k]) * (t[k + 1] - t[k]);
            break;
        }
    }
    let mut right = t[t.len() - 1];
    for k in i + 1..t.len() {
        if a[k] < half {
            right = t[k - 1] + (a[k - 1] - half) / (a[k - 1] - a[k]) * (t[k] - t[k - 1]);
            break;
        }
    }
    right - left
}

/// Local maxima of `|T|` above the threshold, refined by a parabola through
/// three grid points, then greedily matched one-to-one to `{0} ∪ lengths`.
pub fn detect_singularities(curve: &WaveTraceCurve, lengths: &Multiset, settings: PeakSettings) -> PeakReport {
    let abs: Vec<f64> = curve.values.iter().map(|z| z.norm()).collect();
    let threshold = settings.threshold_factor * median(abs.clone());
    let t = &curve.t;
    let n = abs.len();
    let mut peaks = Vec::new();
    for i in 0..n {
        let left = if i > 0 { abs[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < n { abs[i + 1] } else { f64::NEG_INFINITY };
        if abs[i] <= threshold || abs[i] < left || abs[i] <= right {
            continue;
        }
        let (tp, hp) = if i > 0 && i + 1 < n {
            let (y0, y1, y2) = (abs[i - 1], abs[i], abs[i + 1]);
            let denom = y0 - 2.0 * y1 + y2;
            let h = 0.5 * (t[i + 1] - t[i - 1]);
            if denom < 0.0 {
                let shift = 0.5 * (y0 - y2) / denom;
                (t[i] + shift * h, y1 - 0.25 * (y0 - y2) * shift)
            } else {
                (t[i], y1)
            }
        } else {
            (t[i], abs[i])
        };
        peaks.push(Peak { t: tp, height: hp, width: half_width(t, &abs, i, 0.5 * abs[i]), matched: None });
    }

    let mut targets: Vec<f64> = vec![0.0];
    targets.extend(lengths.iter().map(|&(l, _)| l));
    let mut pairs: Vec<(f64, f64, usize, usize)> = Vec::new();
    for (pi, p) in peaks.iter().enumerate() {
        for (li, &l) in targets.iter().enumerate() {
            let d = (p.t - l).abs();
            if d <= settings.tolerance {
                pairs.push((d, l, pi, li));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut used_len = vec![false; targets.len()];
    for (_, l, pi, li) in pairs {
        if peaks[pi].matched.is_none() && !used_len[li] {
            peaks[pi].matched = Some(l);
            used_len[li] = true;
        }
    }
    let t_max = t[n - 1];
    let t_min = t[0];
    let unmatched_lengths = targets
        .iter()
        .zip(&used_len)
        .skip(1)
        .filter(|(&l, &u)| !u && l >= t_min && l <= t_max)
        .map(|(&l, _)| l)
        .collect();
    PeakReport { peaks, unmatched_lengths, threshold }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackPoint {
    pub b: f64,
    pub length: f64,
    pub peak: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySweep {
    pub points: Vec<TrackPoint>,
    pub max_error: f64,
    pub max_step: f64,
    pub max_length_step: f64,
}

impl FamilySweep {
    /// Every grid point matched and successive peaks move by less than
    /// twice the largest length step.
    pub fn continuous(&self) -> bool {
        self.points.iter().all(|p| p.peak.is_some()) && self.max_step < 2.0 * self.max_length_step.max(1e-12)
    }
}

/// Tracks the `index`-th length across the base.
pub fn family_sweep(
    spectra: &SpectrumTable,
    lengths: &GeodesicLengthTable,
    index: usize,
    sigma: f64,
    t_grid: &[f64],
    settings: PeakSettings,
) -> Result<FamilySweep, TraceError> {
    if spectra.entries.len() != lengths.entries.len() {
        return Err(TraceError::GridMismatch);
    }
    let points = spectra
        .entries
        .par_iter()
        .zip(&lengths.entries)
        .map(|(s, l)| {
            let curve = smoothed_wave_trace(s, sigma, t_grid)?;
            let report = detect_singularities(&curve, &l.lengths, settings);
            let length = l.lengths.get(index).map(|x| x.0).unwrap_or(f64::NAN);
            Ok(TrackPoint { b: s.b, length, peak: report.peak_for(length).map(|p| p.t) })
        })
        .collect::<Result<Vec<_>, TraceError>>()?;
    let max_error = points.iter().map(|p| p.peak.map_or(f64::INFINITY, |t| (t - p.length).abs())).fold(0.0, f64::max);
    let diffs = |f: &dyn Fn(&TrackPoint) -> f64| points.windows(2).map(|w| (f(&w[1]) - f(&w[0])).abs()).fold(0.0, f64::max);
    let max_step = diffs(&|p| p.peak.unwrap_or(f64::NAN));
    let max_length_step = diffs(&|p| p.length);
    Ok(FamilySweep { points, max_error, max_step, max_length_step })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatFitReport {
    pub t: Vec<f64>,
    pub heat: Vec<f64>,
    /// Extrapolated `lim H(t)(4πt)^{q/2}`.
    pub leading: f64,
    pub residual: f64,
    pub converged: bool,
}

/// `H(t) = Σ m e^{−tλ}`.
pub fn heat_trace(spec: &SpectrumEntry, t: f64) -> f64 {
    spec.eigenvalues.iter().map(|&(l, m)| m as f64 * (-t * l).exp()).sum()
}

/// Richardson (Neville) extrapolation of `H(t)(4πt)^{q/2}` in `h = √t` over
/// a geometric ladder from `t_max` down to `t_min`.
pub fn heat_trace_fit(spec: &SpectrumEntry, t_min: f64, t_max: f64) -> Result<HeatFitReport, TraceError> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(TraceError::TimeWindow);
    }
    let bound = tail_bound(spec, t_min.sqrt());
    if bound >= 1e-10 {
        return Err(TraceError::InsufficientCutoff { bound, limit: 1e-10 });
    }
    let rungs = 8;
    let ratio = (t_min / t_max).powf(1.0 / (rungs - 1) as f64);
    let t: Vec<f64> = (0..rungs).map(|k| t_max * ratio.powi(k as i32)).collect();
    let heat: Vec<f64> = t.iter().map(|&s| heat_trace(spec, s)).collect();
    let q = spec.dim as f64;
    let f: Vec<f64> = t.iter().zip(&heat).map(|(&s, &h)| h * (4.0 * PI * s).powf(q / 2.0)).collect();
    let h: Vec<f64> = t.iter().map(|s| s.sqrt()).collect();
    // Neville tableau at h = 0; keep the order with the smallest change
    let mut table = f.clone();
    let mut best = (f[rungs - 1], (f[rungs - 1] - f[rungs - 2]).abs());
    for order in 1..rungs {
        let prev_last = table[rungs - 1];
        for i in (order..rungs).rev() {
            table[i] = (h[i - order] * table[i] - h[i] * table[i - 1]) / (h[i - order] - h[i]);
        }
        let change = (table[rungs - 1] - prev_last).abs();
        if change < best.1 {
            best = (table[rungs - 1], change);
        }
    }
    let (leading, residual) = best;
    Ok(HeatFitReport { t, heat, leading, residual, converged: residual <= 1e-6 * leading.abs().max(1.0) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    /// `(4π)^{q/2} a₀/2` from the symbol calculus.
    pub symbolic: f64,
    /// Leading heat coefficient from the spectrum.
    pub spectral: f64,
    pub relative_residual: f64,
    /// Spectrum source: exact isometry route or a discretised eigensolve.
    pub numeric_spectrum: bool,
}

/// Compares `a₀` (through `b₀ = a₀/2`) against the heat-trace extrapolation.
/// Curved metrics use the Fourier-collocation spectrum so the two
/// pipelines share nothing but the metric.
pub fn t0_invariant_crosscheck(spec: &LaplaceOperatorSpec) -> Result<CrossCheck, TraceError> {
    let table = invariant_table(spec, 2)?;
    let q = spec.q() as f64;
    let symbolic = (4.0 * PI).powf(q / 2.0) * table.a[0] / 2.0;
    let w = spec.w().numeric();
    let (entry, numeric_spectrum) = match spec.q() {
        1 if spec.w().is_constant() => (circle_spectrum(&w, 4e4)?, false),
        1 => {
            let (values, _) = circle_spectrum_converged(&w, 121, 1e-9, Discretization::Fourier)?;
            let top = values[values.len() - 1];
            // keep modes below the top, where the discretisation is converged
            (SpectrumEntry::from_values(values.into_iter().filter(|&v| v < top).collect(), 1, top), true)
        }
        _ => {
            let scale = w.eval_real(0.0).sqrt();
            let basis = crate::spectra::LatticeBasis::new([2.0 * PI / scale, 0.0], [0.0, 2.0 * PI / scale])?;
            (crate::spectra::torus_spectrum(&basis, 4e3)?, false)
        }
    };
    let t_min = 30.0 / entry.cutoff;
    let fit = heat_trace_fit(&entry, t_min, 40.0 * t_min)?;
    Ok(CrossCheck {
        symbolic,
        spectral: fit.leading,
        relative_residual: (fit.leading - symbolic).abs() / symbolic.abs(),
        numeric_spectrum,
    })
}
