use fibertrace::symbol::{invariant_table, LaplaceOperatorSpec};

use crate::config::InvariantsConfig;
use crate::report::{Check, CsvTable, Outcome};
use crate::{compute, CliError};

pub fn run(cfg: &InvariantsConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let mut table = CsvTable::new("invariants", &["metric", "j", "a", "b", "pairing_residual"]);
    for (i, metric) in cfg.metrics.iter().enumerate() {
        let spec = LaplaceOperatorSpec::new(cfg.dim, metric.trig()?, 0.0).map_err(compute)?;
        let inv = invariant_table(&spec, cfg.order).map_err(compute)?;
        let mut pairing: f64 = 0.0;
        for (j, (a, b)) in inv.a.iter().zip(&inv.b).enumerate() {
            let r = (b - a / 2.0).abs();
            pairing = pairing.max(r);
            table.push(vec![i.into(), j.into(), (*a).into(), (*b).into(), r.into()]);
        }
        let name = |s: &str| format!("metric{i}.{s}");
        out.check(Check::below(name("pairing"), pairing, cfg.pairing_tolerance));
        out.check(Check::holds(name("parity"), inv.a.iter().skip(1).step_by(2).all(|&a| a == 0.0)));
        out.check(Check::below(name("imaginary_part"), inv.max_imag, cfg.cancellation_tolerance));
        if metric.is_constant() {
            out.check(Check::holds(name("flat_zeros"), inv.a.iter().skip(1).all(|&a| a == 0.0)));
        } else {
            let worst = inv.a.iter().skip(1).map(|a| a.abs()).fold(0.0, f64::max);
            out.check(Check::below(name("cancellation"), worst, cfg.cancellation_tolerance));
        }
    }
    out.tables.push(table);
    Ok(out)
}
