use std::time::Instant;

use fibertrace::calculus::flat::{heat_oracle, wave_oracle};
use fibertrace::calculus::sample::{random_matrix, random_operator, SampleShape};
use fibertrace::calculus::{dstr_identity_check, supertrace_index, ContourSpec, GradedOperator};
use fibertrace::graded::GradedFamily;
use fibertrace::{CForm, Complex64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::MatrixModelConfig;
use crate::report::{Check, CsvTable, Outcome};
use crate::{compute, CliError};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

struct Residuals {
    resolvent: f64,
    root: f64,
    semigroup: f64,
    by_parts: f64,
    wave: f64,
    heat: f64,
    contour: f64,
}

fn battery(q: &GradedOperator, cfg: &MatrixModelConfig, rng: &mut ChaCha8Rng) -> Result<Residuals, CliError> {
    let full = q.full().map_err(compute)?;
    let id = q.identity_form().map_err(compute)?;
    let dist = |a: &CForm, b: &CForm| a.distance(b).map_err(compute);

    let lambda = Complex64::new(rng.random_range(-2.0..-0.2), rng.random_range(0.2..2.0));
    let r = q.resolvent(lambda).map_err(compute)?;
    let shifted = full.sub(&id.scale(&lambda)).map_err(compute)?;
    let resolvent = dist(&shifted.wedge_compose(&r).map_err(compute)?, &id)?;

    let m = rng.random_range(2..=3u32);
    let s = q.mth_root(m).map_err(compute)?;
    let root = dist(&s.pow(m as usize).map_err(compute)?, &full)?;

    let (a, b) = (rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
    let pa = q.complex_power(c(a)).map_err(compute)?;
    let pb = q.complex_power(c(b)).map_err(compute)?;
    let semigroup = dist(&pa.wedge_compose(&pb).map_err(compute)?, &q.complex_power(c(a + b)).map_err(compute)?)?;

    // s away from the poles 1, 2, 3 of the by-parts weights
    let s_exp = c(rng.random_range(0.2..0.8));
    let direct = q.complex_power(s_exp).map_err(compute)?;
    let mut by_parts: f64 = 0.0;
    for n in 1..=3 {
        by_parts = by_parts.max(dist(&q.by_parts_power(s_exp, n).map_err(compute)?, &direct)?);
    }

    let t = rng.random_range(0.1..2.0);
    let duhamel = q.wave_duhamel(2, t, cfg.wave_method).map_err(compute)?;
    let wave = dist(&duhamel, &wave_oracle(&full, t).map_err(compute)?)?;
    let heat = dist(&q.heat(t).map_err(compute)?, &heat_oracle(&full, t).map_err(compute)?)?;

    let roots: Vec<f64> = q.eigenvalues().iter().map(|v| v.sqrt()).collect();
    let lo = roots.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = roots.iter().cloned().fold(0.0, f64::max);
    let spec = ContourSpec { epsilon: 0.5 * lo, height: 1.0, right_edge: 10.0 * hi, points_per_edge: cfg.points_per_edge };
    let contour = dist(&q.wave_contour(t, &spec).map_err(compute)?, &duhamel)?;
    Ok(Residuals { resolvent, root, semigroup, by_parts, wave, heat, contour })
}

/// Rank by Gaussian elimination with partial pivoting.
fn rank(m: &Mat<Complex64>, tol: f64) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Complex64>> = (0..rows).map(|i| (0..cols).map(|j| m[(i, j)]).collect()).collect();
    let threshold = tol * m.max_abs().max(1e-300);
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let pivot = (r..rows).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).expect("rows remain");
        if a[pivot][col].norm() <= threshold {
            continue;
        }
        a.swap(r, pivot);
        for i in r + 1..rows {
            let f = a[i][col] / a[r][col];
            for j in col..cols {
                let v = a[r][j];
                a[i][j] -= f * v;
            }
        }
        r += 1;
    }
    r
}

fn odd_connection(beta: usize, varying: bool, rng: &mut ChaCha8Rng) -> Result<GradedFamily, CliError> {
    let mut u = || rng.random::<f64>();
    let dplus = Mat::identity(2).scale(&c(2.0)).add(&random_matrix(2, 2, 0.3, &mut u));
    let mut a0 = Mat::zeros(4, 4);
    a0.set_block(0, 2, &dplus.adjoint());
    a0.set_block(2, 0, &dplus);
    let a1 = random_matrix(4, 4, 0.4, &mut u).even_part(2);
    let a2 = random_matrix(4, 4, 0.4, &mut u).odd_part(2);
    let form = CForm::scalar(beta, 2, 2, a0)
        .and_then(|f| f.with_term(&[1], a1))
        .and_then(|f| f.with_term(&[1, 2], a2))
        .map_err(compute)?;
    GradedFamily::new(vec![0.0; beta], vec![2.0; beta], 1e-4, (beta, 2, 2), move |b| {
        if varying { form.scale(&c(b[0])) } else { form.clone() }
    })
    .map_err(compute)
}

fn x_family(beta: usize, power: i32, step: f64, rng: &mut ChaCha8Rng) -> Result<GradedFamily, CliError> {
    let mut u = || rng.random::<f64>();
    let x0 = random_matrix(4, 4, 1.0, &mut u);
    let x1 = random_matrix(4, 4, 1.0, &mut u);
    let form = CForm::scalar(beta, 2, 2, x0).and_then(|f| f.with_term(&[2], x1)).map_err(compute)?;
    GradedFamily::new(vec![0.0; beta], vec![2.0; beta], step, (beta, 2, 2), move |b| form.scale(&c(b[0].powi(power))))
        .map_err(compute)
}

pub fn run(cfg: &MatrixModelConfig, seed: u64) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Outcome::default();

    let start = Instant::now();
    let mut ops = CsvTable::new(
        "operators",
        &["index", "beta", "plus", "minus", "resolvent", "root", "semigroup", "by_parts", "wave", "heat", "contour"],
    );
    let mut worst = [0.0f64; 7];
    for i in 0..cfg.operators {
        let beta = rng.random_range(1..=cfg.max_beta);
        let n = rng.random_range(2..=cfg.max_dim);
        let plus = rng.random_range(1..=n);
        let shape = SampleShape { beta, plus, minus: n - plus, spectrum: (0.5, 4.0), coupling: 0.5 };
        let q = random_operator(shape, &mut || rng.random::<f64>()).map_err(compute)?;
        let r = battery(&q, cfg, &mut rng)?;
        let row = [r.resolvent, r.root, r.semigroup, r.by_parts, r.wave, r.heat, r.contour];
        for (w, v) in worst.iter_mut().zip(row) {
            *w = w.max(v);
        }
        let mut cells = vec![i.into(), beta.into(), plus.into(), (n - plus).into()];
        cells.extend(row.iter().map(|v| (*v).into()));
        ops.push(cells);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let names = ["resolvent", "mth_root", "semigroup", "by_parts", "wave_duhamel", "heat"];
    for (name, w) in names.iter().zip(worst) {
        out.check(Check::below(*name, w, cfg.tolerance));
    }
    out.check(Check::below("wave_contour", worst[6], cfg.contour_tolerance));
    out.check(Check::holds("runtime", elapsed < cfg.time_limit));
    out.tables.push(ops);

    let times: Vec<f64> = (0..=8).map(|k| 0.1 * 10f64.powf(k as f64 / 4.0)).collect();
    let mut idx = CsvTable::new("supertrace", &["sample", "rows", "cols", "rank", "oracle", "value_re", "value_im", "variation"]);
    let (mut variation, mut mismatch, mut deficient) = (0.0f64, 0.0f64, 0usize);
    for i in 0..cfg.dplus_samples {
        let rows = rng.random_range(1..=4usize);
        let cols = rng.random_range(1..=4usize);
        let mut u = || rng.random::<f64>();
        let d = if i % 3 == 2 {
            // forced rank deficiency through a thin factorisation
            let inner = rows.min(cols).saturating_sub(1);
            random_matrix(rows, inner, 1.0, &mut u).matmul(&random_matrix(inner, cols, 1.0, &mut u))
        } else {
            random_matrix(rows, cols, 1.0, &mut u)
        };
        let rk = rank(&d, 1e-10);
        if rk < rows.min(cols) {
            deficient += 1;
        }
        let oracle = (cols - rk) as f64 - (rows - rk) as f64;
        let values = times.iter().map(|&t| supertrace_index(&d, t)).collect::<Result<Vec<_>, _>>().map_err(compute)?;
        let var = values.iter().map(|v| (v - values[0]).norm()).fold(0.0, f64::max);
        variation = variation.max(var);
        mismatch = mismatch.max(values.iter().map(|v| (v - c(oracle)).norm()).fold(0.0, f64::max));
        idx.push(vec![
            i.into(),
            rows.into(),
            cols.into(),
            rk.into(),
            oracle.into(),
            values[0].re.into(),
            values[0].im.into(),
            var.into(),
        ]);
    }
    out.check(Check::below("supertrace_variation", variation, cfg.index_tolerance));
    out.check(Check::below("supertrace_index", mismatch, cfg.index_tolerance));
    out.check(Check::holds("rank_deficient_cases", cfg.dplus_samples < 3 || deficient > 0));
    out.tables.push(idx);

    let mut dstr = CsvTable::new("dstr", &["sample", "beta", "varying", "residual", "commutator"]);
    let (mut residual, mut commutator) = (0.0f64, 0.0f64);
    for i in 0..cfg.dstr_samples {
        let beta = 2 + i % 2;
        let varying = i % 3 != 0;
        let conn = odd_connection(beta, varying, &mut rng)?;
        let x = x_family(beta, if varying { 2 } else { 0 }, cfg.fd_step, &mut rng)?;
        let b: Vec<f64> = (0..beta).map(|_| rng.random_range(0.5..1.5)).collect();
        let rep = dstr_identity_check(&conn, &x, &b, 0.2).map_err(compute)?;
        residual = residual.max(rep.max_residual());
        commutator = commutator.max(rep.max_commutator());
        dstr.push(vec![i.into(), beta.into(), varying.into(), rep.max_residual().into(), rep.max_commutator().into()]);
    }
    out.check(Check::below("dstr_residual", residual, cfg.dstr_tolerance));
    out.check(Check::below("supercommutator", commutator, cfg.commutator_tolerance));
    out.tables.push(dstr);
    Ok(out)
}
