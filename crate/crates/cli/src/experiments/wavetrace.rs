use std::f64::consts::PI;
use std::time::Instant;

use fibertrace::spectra::{
    circle_lengths, circle_spectrum, torus_lengths, torus_spectrum, LatticeBasis, LengthEntry, MetricCircleFamily,
    SpectrumEntry,
};
use fibertrace::symbol::{cq_real, rational_from_f64, TrigPoly};
use fibertrace::trace::{detect_singularities, family_sweep, smoothed_wave_trace, PeakSettings};

use super::grid;
use crate::config::{Geometry, WavetraceConfig};
use crate::report::{Check, CsvTable, Outcome};
use crate::{compute, CliError};

fn settings(cfg: &WavetraceConfig) -> PeakSettings {
    PeakSettings { threshold_factor: cfg.threshold_factor, tolerance: cfg.match_window.unwrap_or(3.0 * cfg.sigma) }
}

pub fn run(cfg: &WavetraceConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let t_grid = grid(cfg.t_min, cfg.t_max, cfg.t_step);
    let max_length = cfg.max_length.unwrap_or(cfg.t_max);
    let mut out = Outcome::default();
    let single = |spec: SpectrumEntry, lengths: LengthEntry, out: &mut Outcome| -> Result<(), CliError> {
        let curve = smoothed_wave_trace(&spec, cfg.sigma, &t_grid).map_err(compute)?;
        let report = detect_singularities(&curve, &lengths.lengths, settings(cfg));
        let mut table = CsvTable::new("curve", &["t", "re", "im", "abs"]);
        for (t, v) in curve.t.iter().zip(&curve.values) {
            table.push(vec![(*t).into(), v.re.into(), v.im.into(), v.norm().into()]);
        }
        out.tables.push(table);
        let in_window: Vec<f64> =
            lengths.lengths.iter().map(|l| l.0).filter(|&l| l > 0.0 && l >= cfg.t_min && l <= cfg.t_max).collect();
        let wanted = cfg.expected_peaks.unwrap_or(in_window.len());
        if wanted > in_window.len() {
            return Err(CliError::Validation(format!(
                "expected_peaks = {wanted} but only {} lengths lie in the t window",
                in_window.len()
            )));
        }
        for (n, l) in in_window.iter().take(wanted).enumerate() {
            let err = report.peak_for(*l).map_or(f64::INFINITY, |p| (p.t - l).abs());
            out.check(Check::below(format!("peak{}", n + 1), err, cfg.peak_tolerance));
        }
        out.check(Check::holds("matched_peaks", report.matched().filter(|p| p.matched != Some(0.0)).count() >= wanted));
        out.documents.push(("peaks".to_string(), serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?));
        Ok(())
    };

    match &cfg.geometry {
        Geometry::Circle { metric } => {
            let w = metric.trig()?.numeric();
            let spec = circle_spectrum(&w, cfg.cutoff).map_err(compute)?;
            let lengths = circle_lengths(&w, max_length).map_err(compute)?;
            single(spec, lengths, &mut out)?;
        }
        Geometry::Torus { v1, v2 } => {
            let basis = LatticeBasis::new(*v1, *v2).map_err(compute)?;
            let spec = torus_spectrum(&basis, cfg.cutoff).map_err(compute)?;
            let lengths = torus_lengths(&basis, max_length).map_err(compute)?;
            single(spec, lengths, &mut out)?;
        }
        Geometry::CircleFamily { base, lengths } => {
            // circumference L ⇔ constant metric (2π/L)²
            let metrics = lengths
                .iter()
                .map(|l| rational_from_f64((2.0 * PI / l).powi(2)).map(|c| TrigPoly::constant(cq_real(c))))
                .collect::<Result<Vec<_>, _>>()
                .map_err(compute)?;
            let family = MetricCircleFamily::new(base, |b| {
                let i = base.iter().position(|x| *x == b).expect("grid point of the family");
                metrics[i].clone()
            })
            .map_err(compute)?;
            let spectra = family.spectra(cfg.cutoff).map_err(compute)?;
            let table = family.lengths(max_length).map_err(compute)?;
            let sweep = family_sweep(&spectra, &table, cfg.track, cfg.sigma, &t_grid, settings(cfg)).map_err(compute)?;
            let mut tracks = CsvTable::new("tracks", &["b", "length", "peak", "error"]);
            for p in &sweep.points {
                let peak = p.peak.unwrap_or(f64::NAN);
                tracks.push(vec![p.b.into(), p.length.into(), peak.into(), (peak - p.length).abs().into()]);
            }
            out.tables.push(tracks);
            out.check(Check::below("track_error", sweep.max_error, cfg.peak_tolerance));
            out.check(Check::below("track_step", sweep.max_step, 2.0 * sweep.max_length_step.max(1e-12)));
            out.check(Check::holds("track_continuous", sweep.continuous()));
        }
    }
    if let Some(limit) = cfg.time_limit {
        out.check(Check::holds("runtime", start.elapsed().as_secs_f64() < limit));
    }
    Ok(out)
}
