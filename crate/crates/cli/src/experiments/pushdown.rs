use std::f64::consts::PI;

use fibertrace::pushdown::{
    classical_poisson_check, pushdown_sum, tower_pushdown, vertical_trace_cover, CoverSpec, Gaussian, SchwartzFamily,
};
use fibertrace::Complex64;

use crate::config::PushdownConfig;
use crate::report::{Check, CsvTable, Outcome};
use crate::{compute, CliError};

/// Lift pairs for the kernel-level checks.
const LIFTS: [(f64, f64); 4] = [(0.0, 0.0), (0.7, -1.9), (2.5, 4.0), (-3.1, 0.4)];

pub fn run(cfg: &PushdownConfig) -> Result<Outcome, CliError> {
    let members = cfg
        .scales
        .iter()
        .enumerate()
        .map(|(i, &s)| Gaussian::new(s, cfg.centres.as_ref().map_or(0.0, |c| c[i])))
        .collect::<Result<Vec<_>, _>>()
        .map_err(compute)?;
    let family = SchwartzFamily::new(cfg.base.clone(), members).map_err(compute)?;
    let tol = cfg.tolerance;
    let mut out = Outcome::default();

    let mut poisson = CsvTable::new(
        "poisson",
        &["b", "scale", "centre", "samples", "transform_re", "transform_im", "residual", "tail_bound"],
    );
    let mut traces = CsvTable::new(
        "pushdown",
        &["b", "k", "value_re", "value_im", "closed_form_re", "closed_form_im", "sector_residual", "tail_bound"],
    );
    let mut worst_poisson: f64 = 0.0;
    for (i, &b) in family.base().iter().enumerate() {
        let f = family.member(i);
        let p = classical_poisson_check(&f).map_err(compute)?;
        worst_poisson = worst_poisson.max(p.residual);
        poisson.push(vec![
            b.into(),
            f.scale().into(),
            f.centre().into(),
            p.samples.into(),
            p.transform.re.into(),
            p.transform.im.into(),
            p.residual.into(),
            p.tail_bound.into(),
        ]);

        let one = CoverSpec::new(1).map_err(compute)?;
        for &k in &cfg.folds {
            let cover = CoverSpec::new(k).map_err(compute)?;
            let tr = vertical_trace_cover(&f, cover).map_err(compute)?;
            let sectors: Complex64 = tr.sectors.iter().sum();
            let sector_residual = (sectors - tr.value).norm();
            traces.push(vec![
                b.into(),
                k.into(),
                tr.value.re.into(),
                tr.value.im.into(),
                tr.closed_form.re.into(),
                tr.closed_form.im.into(),
                sector_residual.into(),
                tr.tail_bound.into(),
            ]);
            let name = |s: &str| format!("member{i}.k{k}.{s}");
            out.check(Check::below(name("closed_form"), (tr.value - tr.closed_form).norm(), tol));
            out.check(Check::below(name("sectors"), sector_residual, tol));
            if f.centre() == 0.0 {
                out.check(Check::below(name("real"), tr.value.im.abs(), tol));
            }

            let mut lift: f64 = 0.0;
            let mut tower: f64 = 0.0;
            for (p, q) in LIFTS {
                let v = pushdown_sum(&f, cover, p, q).map_err(compute)?.value;
                let shifted = pushdown_sum(&f, cover, p + cover.step(), q - 2.0 * cover.step()).map_err(compute)?.value;
                lift = lift.max((v - shifted).norm());
                if k > 1 {
                    let down = tower_pushdown(&f, cover, p, q).map_err(compute)?;
                    let direct = pushdown_sum(&f, one, p, q).map_err(compute)?.value;
                    tower = tower.max((down - direct).norm());
                }
            }
            out.check(Check::below(name("lift_invariance"), lift, tol));
            if k > 1 {
                out.check(Check::below(name("tower"), tower, tol));
            }
            if k == 2 {
                // the four quotient values K̄(x̄, ȳ) for x, y ∈ {0, 2π}
                let vals: Vec<Complex64> = [(0.0, 0.0), (0.0, 2.0 * PI), (2.0 * PI, 0.0), (2.0 * PI, 2.0 * PI)]
                    .iter()
                    .map(|&(p, q)| pushdown_sum(&f, cover, p, q).map(|v| v.value))
                    .collect::<Result<_, _>>()
                    .map_err(compute)?;
                let collapse = (vals[0] - vals[3]).norm().max((vals[1] - vals[2]).norm());
                out.check(Check::below(name("two_values"), collapse, tol));
            }
        }
    }
    out.check(Check::below("poisson", worst_poisson, tol));
    out.tables.push(poisson);
    out.tables.push(traces);
    Ok(out)
}
