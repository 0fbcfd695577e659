use std::f64::consts::PI;

use fibertrace::spa::{
    convergence_rate_check, find_critical_set, oscillatory_oracle, reference_corpus, spa_leading, Amplitude, Fibre,
    FibrePhase, FiberedPhase, SpaError,
};
use fibertrace::symbol::NumericTrig;
use fibertrace::Complex64;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn cos_x() -> NumericTrig {
    NumericTrig::from_terms(vec![(1, c(0.5)), (-1, c(0.5))])
}

fn circle(phase: NumericTrig) -> FibrePhase {
    FibrePhase::new(Fibre::Circle, phase, Amplitude::one()).unwrap()
}

// 2π·J₀(r) and 2π·J₁(r) from an independent Bessel evaluation
const TWO_PI_J0: [(f64, f64); 3] =
    [(50.0, 0.3506791971709356), (100.0, 0.12557480098298537), (200.0, -0.09699629575219401)];
const TWO_PI_J1: [(f64, f64); 3] =
    [(50.0, -0.6126848857523216), (100.0, -0.4847185422922665), (200.0, -0.3412054764206917)];

#[test]
fn critical_sets() {
    let crit = find_critical_set(&circle(cos_x())).unwrap();
    assert_eq!(crit.len(), 2);
    assert!(crit[0].x().abs() < 1e-13 && crit[0].signature == -1 && (crit[0].value - 1.0).abs() < 1e-15);
    assert!((crit[1].x() - PI).abs() < 1e-13 && crit[1].signature == 1 && (crit[1].value + 1.0).abs() < 1e-15);

    let torus = FibrePhase::new(Fibre::Torus, cos_x(), Amplitude::one()).unwrap();
    let crit = find_critical_set(&torus).unwrap();
    assert_eq!(crit.len(), 2);
    assert!(crit.iter().all(|k| k.codim == 1 && matches!(k.locus, fibertrace::spa::CriticalLocus::Circle { .. })));

    // cos x + 0.3 sin 2x against plain bisection on a fine grid
    let tilted = &reference_corpus()[1].phase;
    let d1 = |x: f64| -x.sin() + 0.6 * (2.0 * x).cos();
    let mut oracle = Vec::new();
    let n = 100_000;
    for i in 0..n {
        let (mut a, mut b) = (2.0 * PI * i as f64 / n as f64, 2.0 * PI * (i + 1) as f64 / n as f64);
        if d1(a) * d1(b) < 0.0 {
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if d1(a) * d1(m) <= 0.0 { b = m } else { a = m }
            }
            oracle.push(0.5 * (a + b));
        }
    }
    let crit = find_critical_set(tilted).unwrap();
    assert_eq!(crit.len(), oracle.len());
    for (k, x) in crit.iter().zip(&oracle) {
        assert!((k.x() - x).abs() < 1e-12, "{} vs {x}", k.x());
        assert_eq!(k.signature as f64, (-(k.x()).cos() - 1.2 * (2.0 * k.x()).sin()).signum());
    }

    // cos x − cos 2x / 4 has a cubic zero of φ′ at 0
    let flat = NumericTrig::from_terms(vec![(1, c(0.5)), (-1, c(0.5)), (2, c(-0.125)), (-2, c(-0.125))]);
    assert!(matches!(find_critical_set(&circle(flat)), Err(SpaError::Degenerate { .. })));
    // φ = sin x / 2 − sin 2x / 4: φ′ = (1 − cos x)(cos x + 1/2) touches zero at 0
    let touching = circle(NumericTrig::from_terms(vec![
        (1, Complex64::new(0.0, -0.25)),
        (-1, Complex64::new(0.0, 0.25)),
        (2, Complex64::new(0.0, 0.125)),
        (-2, Complex64::new(0.0, -0.125)),
    ]));
    assert!(matches!(find_critical_set(&touching), Err(SpaError::Degenerate { .. })));
    assert!(matches!(find_critical_set(&touching.translated(0.1234)), Err(SpaError::Degenerate { .. })));
}

#[test]
fn oracle_fixtures() {
    let p = circle(cos_x());
    for (r, v) in TWO_PI_J0 {
        let got = oscillatory_oracle(&p, r).unwrap();
        assert!((got - c(v)).norm() < 1e-12, "r={r}: {got}");
    }
    let weighted = FibrePhase::new(Fibre::Circle, cos_x(), Amplitude::from_circle(&cos_x())).unwrap();
    for (r, v) in TWO_PI_J1 {
        let got = oscillatory_oracle(&weighted, r).unwrap();
        assert!((got - Complex64::new(0.0, v)).norm() < 1e-12, "r={r}: {got}");
    }
    // r = 0 and constant phase
    let q = Amplitude::Trig(vec![((0, 0), c(1.5)), ((1, 0), c(0.2)), ((-1, 0), c(0.2))]);
    let p = FibrePhase::new(Fibre::Circle, cos_x(), q.clone()).unwrap();
    assert!((oscillatory_oracle(&p, 0.0).unwrap() - c(3.0 * PI)).norm() < 1e-12);
    let p = FibrePhase::new(Fibre::Circle, NumericTrig::constant(0.7), q).unwrap();
    let expected = Complex64::new(0.0, 40.0 * 0.7).exp() * 3.0 * PI;
    assert!((oscillatory_oracle(&p, 40.0).unwrap() - expected).norm() < 1e-12);
}

#[test]
fn leading_term_against_oracle() {
    for entry in reference_corpus() {
        let lead = spa_leading(&entry.phase, 100.0).unwrap().total;
        let oracle = oscillatory_oracle(&entry.phase, 100.0).unwrap();
        assert!((lead - oracle).norm() / oracle.norm() < 0.02, "{}: {lead} vs {oracle}", entry.name);
    }
    // y-independent amplitude: torus value is 2π times the circle value
    let torus = FibrePhase::new(Fibre::Torus, cos_x(), Amplitude::one()).unwrap();
    let ratio = spa_leading(&torus, 100.0).unwrap().total / spa_leading(&circle(cos_x()), 100.0).unwrap().total;
    assert!((ratio - c(2.0 * PI)).norm() < 1e-12);

    // amplitude concentrated near x = π/2, away from both critical points
    let away = Amplitude::ExpTrig(vec![((0, 0), c(-30.0)), ((1, 0), Complex64::new(0.0, -15.0)), ((-1, 0), Complex64::new(0.0, 15.0))]);
    let p = FibrePhase::new(Fibre::Circle, cos_x(), away).unwrap();
    assert!(spa_leading(&p, 200.0).unwrap().total.norm() < 1e-12);
    assert!(oscillatory_oracle(&p, 200.0).unwrap().norm() < 1e-8);
    assert!(matches!(spa_leading(&p, 0.0), Err(SpaError::NonPositiveFrequency(_))));
}

#[test]
fn remainder_rates() {
    for entry in reference_corpus() {
        let report = convergence_rate_check(&entry.phase, &entry.ladder).unwrap();
        assert!(report.within(0.25), "{}: {report:?}", entry.name);
    }
    let away = Amplitude::ExpTrig(vec![((0, 0), c(-30.0)), ((1, 0), Complex64::new(0.0, -15.0)), ((-1, 0), Complex64::new(0.0, 15.0))]);
    let p = FibrePhase::new(Fibre::Circle, cos_x(), away).unwrap();
    let ladder: Vec<f64> = (3..7).map(|j| 2.0 * PI * 2f64.powi(j)).collect();
    let report = convergence_rate_check(&p, &ladder).unwrap();
    assert!(report.below_floor.iter().all(|b| *b) && report.slope.is_none());
    assert!(matches!(convergence_rate_check(&p, &[10.0, 20.0]), Err(SpaError::RateList)));
    assert!(matches!(convergence_rate_check(&p, &[10.0, 20.0, 50.0]), Err(SpaError::RateList)));
}

#[test]
fn symmetries() {
    for entry in reference_corpus() {
        let p = &entry.phase;
        let base = spa_leading(p, 80.0).unwrap();
        let moved = spa_leading(&p.translated(0.37), 80.0).unwrap();
        assert!((base.total - moved.total).norm() < 1e-12, "{}", entry.name);

        // (2π/r)^{n/2}: a factor 4^{n/2} for r → 4r and 2^{n/2} for r → 2r
        let far = spa_leading(p, 320.0).unwrap();
        let near = spa_leading(p, 160.0).unwrap();
        for (((k, a), (_, b)), (_, m)) in base.components.iter().zip(&far.components).zip(&near.components) {
            let n = k.codim as f64;
            assert!((a.norm() / b.norm() - 4f64.powf(n / 2.0)).abs() < 1e-12, "{}", entry.name);
            assert!((a.norm() / m.norm() - 2f64.powf(n / 2.0)).abs() < 1e-12, "{}", entry.name);
        }
    }
    // real amplitude: φ → −φ conjugates
    let p = &reference_corpus()[1].phase;
    let a = spa_leading(p, 90.0).unwrap().total;
    let b = spa_leading(&p.negated(), 90.0).unwrap().total;
    assert!((a.conj() - b).norm() < 1e-14);
}

#[test]
fn validation_and_sweep() {
    let complex = NumericTrig::from_terms(vec![(1, c(1.0))]);
    assert!(matches!(FibrePhase::new(Fibre::Circle, complex, Amplitude::one()), Err(SpaError::ComplexPhase(_))));
    let around = Amplitude::Trig(vec![((0, 1), c(1.0))]);
    assert!(matches!(FibrePhase::new(Fibre::Circle, cos_x(), around), Err(SpaError::FibreMismatch)));

    let members: Vec<FibrePhase> =
        [0.5, 1.0, 1.5].iter().map(|s| circle(cos_x().scaled(*s))).collect();
    let fam = FiberedPhase::new(vec![0.0, 0.5, 1.0], members).unwrap();
    for (lead, oracle) in fam.sweep(120.0).unwrap() {
        assert!((lead.total - oracle).norm() / oracle.norm() < 0.03);
    }
    assert!(FiberedPhase::new(vec![0.0], vec![]).is_err());
}
