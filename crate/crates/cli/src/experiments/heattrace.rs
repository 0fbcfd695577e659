use std::f64::consts::PI;

use fibertrace::spectra::{circle_length, circle_spectrum, torus_spectrum, LatticeBasis};
use fibertrace::symbol::{cq_real, rational_from_f64, LaplaceOperatorSpec, TrigPoly};
use fibertrace::trace::{heat_trace_fit, t0_invariant_crosscheck};

use crate::config::{Geometry, HeattraceConfig};
use crate::report::{Check, CsvTable, Outcome};
use crate::{compute, CliError};

pub fn run(cfg: &HeattraceConfig) -> Result<Outcome, CliError> {
    // spectrum, volume, and the operator for the symbolic side when one exists
    let (spec, volume, operator, constant) = match &cfg.geometry {
        Geometry::Circle { metric } => {
            let trig = metric.trig()?;
            let w = trig.numeric();
            let op = LaplaceOperatorSpec::new(1, trig, 0.0).map_err(compute)?;
            (circle_spectrum(&w, cfg.cutoff).map_err(compute)?, circle_length(&w).map_err(compute)?, Some(op), metric.is_constant())
        }
        Geometry::Torus { v1, v2 } => {
            let basis = LatticeBasis::new(*v1, *v2).map_err(compute)?;
            let side = v1[0].hypot(v1[1]);
            let square = (v1[0] * v2[0] + v1[1] * v2[1]).abs() < 1e-14 && (v2[0].hypot(v2[1]) - side).abs() < 1e-14;
            // a square lattice of side ℓ is the standard torus with metric (2π/ℓ)²
            let op = if square {
                let c = rational_from_f64((2.0 * PI / side).powi(2)).map_err(compute)?;
                Some(LaplaceOperatorSpec::new(2, TrigPoly::constant(cq_real(c)), 0.0).map_err(compute)?)
            } else {
                None
            };
            (torus_spectrum(&basis, cfg.cutoff).map_err(compute)?, basis.covolume(), op, true)
        }
        Geometry::CircleFamily { .. } => return Err(CliError::Validation("heattrace takes a single circle or torus".into())),
    };

    let fit = heat_trace_fit(&spec, cfg.t_min, cfg.t_max).map_err(compute)?;
    let q = spec.dim as f64;
    let mut table = CsvTable::new("heat", &["t", "heat", "scaled"]);
    for (t, h) in fit.t.iter().zip(&fit.heat) {
        table.push(vec![(*t).into(), (*h).into(), (h * (4.0 * PI * t).powf(q / 2.0)).into()]);
    }
    let mut out = Outcome::default();
    out.tables.push(table);
    out.check(Check::below("leading_vs_volume", (fit.leading / volume - 1.0).abs(), cfg.tolerance));
    if let Some(op) = operator {
        let cross = t0_invariant_crosscheck(&op).map_err(compute)?;
        let tol = cfg.crosscheck_tolerance.unwrap_or(if constant { 1e-3 } else { 1e-2 });
        out.check(Check::below("t0_crosscheck", cross.relative_residual, tol));
        out.documents.push(("crosscheck".to_string(), serde_json::to_value(&cross).map_err(|e| CliError::Io(e.to_string()))?));
    }
    out.documents.push((
        "fit".to_string(),
        serde_json::json!({ "leading": fit.leading, "volume": volume, "residual": fit.residual, "converged": fit.converged }),
    ));
    Ok(out)
}
