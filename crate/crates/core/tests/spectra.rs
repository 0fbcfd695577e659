use std::f64::consts::PI;

use fibertrace::spectra::{
    circle_length, circle_lengths, circle_spectrum, circle_spectrum_converged, circle_spectrum_numeric, torus_lengths,
    torus_spectrum, Discretization, FlatTorusFamily, LatticeBasis, MetricCircleFamily, SpectraError,
};
use fibertrace::symbol::{rational, NumericTrig, TrigPoly};
use fibertrace::Complex64;

fn curved() -> NumericTrig {
    TrigPoly::from_real_series(rational(1, 1), &[(1, rational(3, 10))], &[(2, rational(1, 5))]).numeric()
}

fn expand(m: &[(f64, usize)]) -> Vec<f64> {
    m.iter().flat_map(|&(v, k)| std::iter::repeat_n(v, k)).collect()
}

/// Adaptive Simpson, the independent quadrature oracle.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

#[test]
fn lengths_of_simple_circles() {
    assert!((circle_length(&NumericTrig::constant(1.0)).unwrap() - 2.0 * PI).abs() < 1e-14);
    assert!((circle_length(&NumericTrig::constant(4.0)).unwrap() - PI).abs() < 1e-14);
    let w = curved();
    let oracle = simpson(&|x| w.eval_real(x).powf(-0.5), 0.0, 2.0 * PI, 1e-14);
    assert!((circle_length(&w).unwrap() - oracle).abs() < 1e-12);
    let bad = NumericTrig::from_terms(vec![(0, Complex64::new(0.2, 0.0)), (1, Complex64::new(0.5, 0.0)), (-1, Complex64::new(0.5, 0.0))]);
    assert!(matches!(circle_length(&bad), Err(SpectraError::NonPositiveMetric(_))));
}

#[test]
fn exact_circle_spectra() {
    let flat = circle_spectrum(&NumericTrig::constant(1.0), 16.5).unwrap();
    assert_eq!(expand(&flat.eigenvalues).iter().map(|v| v.round() as i64).collect::<Vec<_>>(), vec![0, 1, 1, 4, 4, 9, 9, 16, 16]);
    let four = circle_spectrum(&NumericTrig::constant(4.0), 64.5).unwrap();
    let vals = expand(&four.eigenvalues);
    for (v, e) in vals.iter().zip([0.0, 4.0, 4.0, 16.0, 16.0, 36.0, 36.0, 64.0, 64.0]) {
        assert!((v - e).abs() < 1e-12);
    }
    let lengths = circle_lengths(&NumericTrig::constant(1.0), 20.0).unwrap();
    assert_eq!(lengths.lengths.len(), 3);
    assert!((lengths.lengths[2].0 - 6.0 * PI).abs() < 1e-12);
}

#[test]
fn numeric_oracles_on_constant_metrics() {
    for method in [Discretization::Fourier, Discretization::FiniteDifference] {
        let tol = if method == Discretization::Fourier { 1e-9 } else { 2e-2 };
        let flat = circle_spectrum_numeric(&NumericTrig::constant(1.0), 201, 5, method).unwrap();
        for (v, e) in flat.iter().zip([0.0, 1.0, 1.0, 4.0, 4.0]) {
            assert!((v - e).abs() < tol, "{method:?}: {v} vs {e}");
        }
        let four = circle_spectrum_numeric(&NumericTrig::constant(4.0), 201, 5, method).unwrap();
        for (v, e) in four.iter().zip([0.0, 4.0, 4.0, 16.0, 16.0]) {
            assert!((v - e).abs() < 4.0 * tol);
        }
    }
    assert!(matches!(
        circle_spectrum_numeric(&NumericTrig::constant(1.0), 40, 10, Discretization::Fourier),
        Err(SpectraError::GridTooSmall { .. })
    ));
}

#[test]
fn curved_circle_is_isometric_to_flat() {
    let w = curved();
    let exact = expand(&circle_spectrum(&w, 2000.0).unwrap().eigenvalues);
    let (numeric, _) = circle_spectrum_converged(&w, 21, 1e-10, Discretization::Fourier).unwrap();
    for (k, (e, n)) in exact.iter().zip(&numeric).take(21).enumerate() {
        assert!((e - n).abs() < 1e-6 * e.max(1.0), "mode {k}: {e} vs {n}");
    }
    // second-order scheme: error ratio ≈ 4 when the grid doubles
    let err = |n: usize| {
        let v = circle_spectrum_numeric(&w, n, 5, Discretization::FiniteDifference).unwrap();
        (v[4] - exact[4]).abs()
    };
    let ratio = err(200) / err(400);
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

fn brute_lengths(v1: [f64; 2], v2: [f64; 2], max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for m in -60i64..=60 {
        for n in -60i64..=60 {
            if (m, n) == (0, 0) {
                continue;
            }
            let p = [m as f64 * v1[0] + n as f64 * v2[0], m as f64 * v1[1] + n as f64 * v2[1]];
            let r = p[0].hypot(p[1]);
            if r <= max {
                out.push(r);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn lattice_enumeration() {
    let unit = LatticeBasis::new([1.0, 0.0], [0.0, 1.0]).unwrap();
    let lengths = torus_lengths(&unit, 2.05).unwrap().lengths;
    assert_eq!(lengths.len(), 3);
    for ((l, m), (e, k)) in lengths.iter().zip([(1.0, 4), (2f64.sqrt(), 4), (2.0, 4)]) {
        assert!((l - e).abs() < 1e-14);
        assert_eq!(*m, k);
    }
    let spec = torus_spectrum(&unit, 8.0 * PI * PI + 1.0).unwrap();
    assert_eq!(spec.eigenvalues[0], (0.0, 1));
    assert_eq!(spec.eigenvalues[1].1, 4);
    assert!((spec.eigenvalues[2].0 - 8.0 * PI * PI).abs() < 1e-10);

    let rect = LatticeBasis::new([1.0, 0.0], [0.0, 0.6]).unwrap();
    assert!((rect.covolume() - 0.6).abs() < 1e-15);
    assert!((torus_lengths(&rect, 3.0).unwrap().lengths[0].0 - 0.6).abs() < 1e-15);

    let (v1, v2) = ([1.0, 0.0], [0.3, 1.1]);
    let sheared = LatticeBasis::new(v1, v2).unwrap();
    let got: Vec<f64> = torus_lengths(&sheared, 6.0).unwrap().lengths.iter().flat_map(|&(v, m)| std::iter::repeat_n(v, m)).collect();
    let brute = brute_lengths(v1, v2, 6.0);
    assert_eq!(got.len(), brute.len());
    assert!(got.iter().zip(&brute).all(|(a, b)| (a - b).abs() < 1e-12));

    assert!(matches!(LatticeBasis::new([1.0, 2.0], [2.0, 4.0]), Err(SpectraError::DependentBasis(_))));
    assert!(matches!(torus_spectrum(&unit, 1e12), Err(SpectraError::CutoffTooLarge { .. })));
}

#[test]
fn weyl_counts() {
    let w = curved();
    let l = circle_length(&w).unwrap();
    let e = circle_spectrum(&w, 1e4).unwrap();
    assert!((e.weyl_ratio(l) - 1.0).abs() < 0.05);
    let sheared = LatticeBasis::new([1.0, 0.0], [0.3, 1.1]).unwrap();
    let t = torus_spectrum(&sheared, 4e4).unwrap();
    assert!((t.weyl_ratio(sheared.covolume()) - 1.0).abs() < 0.05);
    assert_eq!(t.counting(1e-9), 1);
}

#[test]
fn families_and_tracks() {
    let grid: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
    let fam = MetricCircleFamily::new(&grid, |b| {
        let c = 2.0 * PI / (4.0 + 5.0 * b);
        TrigPoly::constant(fibertrace::symbol::cq_real(fibertrace::symbol::rational_from_f64(c * c).unwrap()))
    })
    .unwrap();
    let lengths = fam.lengths(10.0).unwrap();
    for (e, b) in lengths.entries.iter().zip(&grid) {
        assert!((e.lengths[0].0 - (4.0 + 5.0 * b)).abs() < 1e-12);
    }
    assert!(lengths.near_crossings(1e-2).is_empty());
    let spectra = fam.spectra(100.0).unwrap();
    assert_eq!(spectra.entries.len(), 9);

    let tori = FlatTorusFamily::new(&grid, |b| [[1.0, 0.0], [0.3 * b, 1.0 + 0.1 * b]]).unwrap();
    let lt = tori.lengths(1.5).unwrap();
    // |v₂| crosses |v₁| = 1 somewhere in the sweep: flagged, not resolved
    assert!(!lt.near_crossings(0.05).is_empty());
    assert!(MetricCircleFamily::new(&[1.0, 0.5], |_| TrigPoly::one()).is_err());
}
