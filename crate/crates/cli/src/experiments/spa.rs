use fibertrace::spa::{
    convergence_rate_check, find_critical_set, oscillatory_oracle, reference_corpus, spa_leading, Amplitude, FibrePhase,
    ERROR_FLOOR,
};
use serde_json::json;

use super::series;
use crate::config::SpaConfig;
use crate::report::{Check, CsvTable, Outcome};
use crate::{compute, CliError};

pub fn run(cfg: &SpaConfig) -> Result<Outcome, CliError> {
    let mut members: Vec<(String, FibrePhase, Vec<f64>)> = Vec::new();
    if cfg.reference_corpus {
        members.extend(reference_corpus().into_iter().map(|e| (e.name.to_string(), e.phase, e.ladder)));
    }
    for m in &cfg.members {
        let amplitude = m.amplitude.as_ref().map_or_else(Amplitude::one, |a| Amplitude::from_circle(&series(a)));
        let phase = FibrePhase::new(m.fibre, series(&m.phase), amplitude).map_err(compute)?;
        members.push((m.name.clone(), phase, m.ladder.clone()));
    }

    let mut out = Outcome::default();
    let mut values = CsvTable::new(
        "spa",
        &["name", "r", "components", "leading_re", "leading_im", "oracle_re", "oracle_im", "abs_error", "rel_error"],
    );
    let mut rates = CsvTable::new("rates", &["name", "r", "error", "below_floor"]);
    let mut fits = Vec::new();
    for (name, phase, ladder) in &members {
        let crit = find_critical_set(phase).map_err(compute)?;
        let leading = spa_leading(phase, cfg.r).map_err(compute)?.total;
        let oracle = oscillatory_oracle(phase, cfg.r).map_err(compute)?;
        let abs_error = (oracle - leading).norm();
        let rel_error = abs_error / oracle.norm();
        values.push(vec![
            name.as_str().into(),
            cfg.r.into(),
            crit.len().into(),
            leading.re.into(),
            leading.im.into(),
            oracle.re.into(),
            oracle.im.into(),
            abs_error.into(),
            rel_error.into(),
        ]);
        let report = convergence_rate_check(phase, ladder).map_err(compute)?;
        for ((r, e), floor) in report.r.iter().zip(&report.errors).zip(&report.below_floor) {
            rates.push(vec![name.as_str().into(), (*r).into(), (*e).into(), (*floor).into()]);
        }
        if report.below_floor.iter().all(|b| *b) {
            // nothing to fit: the leading term is already exact to the floor
            out.check(Check::below(format!("{name}.leading"), abs_error, ERROR_FLOOR));
            out.check(Check::holds(format!("{name}.rate_below_floor"), true));
        } else {
            out.check(Check::below(format!("{name}.leading"), rel_error, cfg.rel_tolerance));
            let dev = report.slope.map_or(f64::INFINITY, |s| (s - report.expected).abs());
            out.check(Check::below(format!("{name}.slope"), dev, cfg.slope_tolerance));
        }
        fits.push(json!({
            "name": name,
            "critical_set": crit,
            "slope": report.slope,
            "expected_slope": report.expected,
        }));
    }
    out.tables.push(values);
    out.tables.push(rates);
    out.documents.push(("fits".to_string(), json!(fits)));
    Ok(out)
}
