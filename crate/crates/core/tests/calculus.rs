use fibertrace::calculus::flat::{flatten, heat_oracle, sqrt_oracle, unflatten, wave_oracle};
use fibertrace::calculus::sample::{random_matrix, random_operator, SampleShape};
use fibertrace::calculus::{
    dstr_identity_check, supertrace_index, CalculusError, ContourSpec, GradedOperator, WaveMethod,
};
use fibertrace::graded::{GradedFamily, MultiIndex};
use fibertrace::{CForm, Complex64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn db1() -> MultiIndex {
    MultiIndex::single(1)
}

/// `Q = 4 + db` with 1×1 blocks.
fn four_plus_db() -> GradedOperator {
    let qplus = CForm::zero(1, 1, 0).unwrap().with_term(&[1], Mat::diag(&[c(1.0)])).unwrap();
    GradedOperator::new(Mat::diag(&[c(4.0)]), qplus, 2).unwrap()
}

fn diag_op(values: &[f64]) -> GradedOperator {
    let d: Vec<Complex64> = values.iter().map(|&v| c(v)).collect();
    GradedOperator::new(Mat::diag(&d), CForm::zero(1, values.len(), 0).unwrap(), 2).unwrap()
}

fn entry(x: &CForm, idx: MultiIndex) -> Complex64 {
    x.coefficient(idx)[(0, 0)]
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sample(seed: u64, beta: usize, plus: usize, minus: usize) -> GradedOperator {
    let mut r = rng(seed);
    let shape = SampleShape { beta, plus, minus, spectrum: (0.5, 4.0), coupling: 0.5 };
    random_operator(shape, &mut || r.random::<f64>()).unwrap()
}

#[test]
fn resolvent_hand_values() {
    let r = diag_op(&[1.0, 4.0]).resolvent(c(-1.0)).unwrap();
    let m = r.coefficient(MultiIndex::EMPTY);
    assert!((m[(0, 0)] - c(0.5)).norm() < 1e-15);
    assert!((m[(1, 1)] - c(0.2)).norm() < 1e-15);

    let r = four_plus_db().resolvent(c(0.0)).unwrap();
    assert!((entry(&r, MultiIndex::EMPTY) - c(0.25)).norm() < 1e-15);
    assert!((entry(&r, db1()) - c(-1.0 / 16.0)).norm() < 1e-15);
}

#[test]
fn resolvent_defining_identity() {
    let q = sample(11, 2, 3, 0);
    let lambda = Complex64::new(-0.7, 1.3);
    let r = q.resolvent(lambda).unwrap();
    let shifted = q.full().unwrap().sub(&q.identity_form().unwrap().scale(&lambda)).unwrap();
    let prod = shifted.wedge_compose(&r).unwrap();
    assert!(prod.distance(&q.identity_form().unwrap()).unwrap() < 1e-12);
    assert!(matches!(diag_op(&[1.0, 4.0]).resolvent(c(4.0)), Err(CalculusError::Singular { .. })));
}

#[test]
fn complex_power_hand_values() {
    let x = diag_op(&[1.0, 4.0]).complex_power(c(0.5)).unwrap();
    let m = x.coefficient(MultiIndex::EMPTY);
    assert!((m[(0, 0)] - c(1.0)).norm() < 1e-15 && (m[(1, 1)] - c(0.5)).norm() < 1e-15);

    let x = four_plus_db().complex_power(c(0.5)).unwrap();
    assert!((entry(&x, MultiIndex::EMPTY) - c(0.5)).norm() < 1e-15);
    assert!((entry(&x, db1()) - c(-1.0 / 16.0)).norm() < 1e-15);
}

#[test]
fn complex_power_semigroup() {
    for (seed, minus) in [(1, 0), (2, 2)] {
        let q = sample(seed, 3, 3, minus);
        let a = q.complex_power(c(0.3)).unwrap();
        let b = q.complex_power(c(0.9)).unwrap();
        let ab = q.complex_power(c(1.2)).unwrap();
        assert!(a.wedge_compose(&b).unwrap().distance(&ab).unwrap() < 1e-11);
    }
    // negative real part through the same divided differences
    let q = sample(3, 2, 2, 1);
    let pos = q.complex_power(c(-1.0)).unwrap();
    assert!(pos.distance(&q.full().unwrap()).unwrap() < 1e-12);
}

#[test]
fn by_parts_matches_direct_power() {
    let q = diag_op(&[1.0, 4.0]);
    let direct = q.complex_power(c(0.5)).unwrap();
    assert!(q.by_parts_power(c(0.5), 1).unwrap().distance(&direct).unwrap() < 1e-14);
    let q = sample(5, 3, 3, 2);
    let s = c(0.7);
    let direct = q.complex_power(s).unwrap();
    for n in 0..=3 {
        assert!(q.by_parts_power(s, n).unwrap().distance(&direct).unwrap() < 1e-10, "n={n}");
    }
    assert!(matches!(q.by_parts_power(c(2.0), 3), Err(CalculusError::ByPartsPole { .. })));
}

#[test]
fn mth_root_hand_and_random() {
    let s = four_plus_db().mth_root(2).unwrap();
    assert!((entry(&s, MultiIndex::EMPTY) - c(2.0)).norm() < 1e-15);
    assert!((entry(&s, db1()) - c(0.25)).norm() < 1e-15);

    let s = diag_op(&[1.0, 8.0]).mth_root(3).unwrap();
    assert!((s.coefficient(MultiIndex::EMPTY)[(1, 1)] - c(2.0)).norm() < 1e-14);

    let q = sample(7, 3, 2, 2);
    let s = q.mth_root(3).unwrap();
    assert!(s.pow(3).unwrap().distance(&q.full().unwrap()).unwrap() < 1e-10);
}

#[test]
fn wave_duhamel_hand_value() {
    let q = four_plus_db();
    for t in [0.0, 0.4, -1.3, 5.0] {
        for method in [WaveMethod::ExactDividedDifferences, WaveMethod::SimplexQuadrature] {
            let u = q.wave_duhamel(2, t, method).unwrap();
            let phase = Complex64::new(0.0, -2.0 * t).exp();
            assert!((entry(&u, MultiIndex::EMPTY) - phase).norm() < 1e-12);
            assert!((entry(&u, db1()) - phase * Complex64::new(0.0, -t / 4.0)).norm() < 1e-9);
        }
    }
}

#[test]
fn wave_duhamel_matches_flattened_oracle() {
    for (seed, beta, plus, minus) in [(21, 2, 3, 0), (22, 3, 2, 2), (23, 3, 4, 2)] {
        let q = sample(seed, beta, plus, minus);
        let oracle = wave_oracle(&q.full().unwrap(), 0.3).unwrap();
        let exact = q.wave_duhamel(2, 0.3, WaveMethod::ExactDividedDifferences).unwrap();
        assert!(exact.distance(&oracle).unwrap() < 1e-9, "seed {seed}");
        let quad = q.wave_duhamel(2, 0.3, WaveMethod::SimplexQuadrature).unwrap();
        assert!(quad.distance(&oracle).unwrap() < 1e-8, "seed {seed}");
    }
}

#[test]
fn wave_duhamel_cauchy_contract() {
    let q = sample(31, 2, 3, 1);
    let s = q.mth_root(2).unwrap();
    let mut last = f64::INFINITY;
    for h in [1e-2, 5e-3, 2.5e-3] {
        let t = 0.7;
        let u = |t| q.wave_duhamel(2, t, WaveMethod::ExactDividedDifferences).unwrap();
        let du = u(t + h).sub(&u(t - h)).unwrap().scale(&c(0.5 / h));
        let residual = du.add(&s.wedge_compose(&u(t)).unwrap().scale(&Complex64::new(0.0, 1.0))).unwrap();
        let r = residual.max_abs();
        assert!(r < 0.5 * h * h * 10.0, "h={h}: {r}");
        // second order: halving h divides the residual by ≈ 4
        assert!(r < last / 3.0);
        last = r;
    }
}

#[test]
fn wave_contour_examples() {
    let q = diag_op(&[1.0, 4.0]);
    let spec = ContourSpec { epsilon: 0.5, height: 1.0, right_edge: 20.0, points_per_edge: 512 };
    let u = q.wave_contour(0.1, &spec).unwrap().coefficient(MultiIndex::EMPTY);
    assert!((u[(0, 0)] - Complex64::new(0.0, -0.1).exp()).norm() < 1e-6);
    assert!((u[(1, 1)] - Complex64::new(0.0, -0.2).exp()).norm() < 1e-6);

    let q = four_plus_db();
    let spec = ContourSpec { epsilon: 1.0, height: 1.0, right_edge: 20.0, points_per_edge: 512 };
    let a = q.wave_contour(0.05, &spec).unwrap();
    let b = q.wave_duhamel(2, 0.05, WaveMethod::ExactDividedDifferences).unwrap();
    assert!(a.distance(&b).unwrap() < 1e-6);
    let id = q.wave_contour(0.0, &spec).unwrap();
    assert!(id.distance(&q.identity_form().unwrap()).unwrap() < 1e-6);

    let bad = ContourSpec { epsilon: 2.5, ..spec };
    assert!(matches!(q.wave_contour(0.1, &bad), Err(CalculusError::ContourCollision { .. })));
}

#[test]
fn heat_examples() {
    let q = four_plus_db();
    let h = q.heat(1.0).unwrap();
    let e4 = (-4.0f64).exp();
    assert!((entry(&h, MultiIndex::EMPTY) - c(e4)).norm() < 1e-16);
    assert!((entry(&h, db1()) - c(-e4)).norm() < 1e-16);
    assert!(matches!(q.heat(0.0), Err(CalculusError::NonPositiveTime(_))));

    let q = sample(41, 3, 3, 2);
    let exact = q.heat(0.8).unwrap();
    let oracle = heat_oracle(&q.full().unwrap(), 0.8).unwrap();
    assert!(exact.distance(&oracle).unwrap() < 1e-11);
    let volterra = q.heat_volterra(0.8).unwrap();
    assert!(exact.distance(&volterra).unwrap() < 1e-10);
}

#[test]
fn degree_zero_projection_is_spectral() {
    let q = sample(51, 2, 3, 1);
    let eig = q.spectral_decomposition();
    assert!(eig.reconstruct().sub(q.p()).max_abs() < 1e-12);
    for proj in &eig.projectors {
        assert!(proj.matmul(proj).sub(proj).max_abs() < 1e-12);
    }
    let spectral = |f: &dyn Fn(f64) -> Complex64| {
        eig.eigenvalues.iter().zip(&eig.projectors).fold(Mat::zeros(4, 4), |acc, (l, p)| acc.add(&p.scale(&f(*l))))
    };
    let h = q.heat(0.5).unwrap().coefficient(MultiIndex::EMPTY);
    assert!(h.sub(&spectral(&|l| c((-0.5 * l).exp()))).max_abs() < 1e-13);
    let w = q.wave_duhamel(2, 1.1, WaveMethod::ExactDividedDifferences).unwrap().coefficient(MultiIndex::EMPTY);
    assert!(w.sub(&spectral(&|l| Complex64::new(0.0, -1.1 * l.sqrt()).exp())).max_abs() < 1e-13);
}

#[test]
fn flattening_is_a_homomorphism() {
    let q = sample(61, 3, 2, 2);
    let x = q.full().unwrap();
    let y = q.complex_power(c(0.4)).unwrap();
    let lhs = flatten(&x.wedge_compose(&y).unwrap());
    let rhs = flatten(&x) * flatten(&y);
    assert!((lhs - rhs).norm() < 1e-12);
    assert!(unflatten(&flatten(&x), x.shape()).unwrap().distance(&x).unwrap() < 1e-15);
    let root = sqrt_oracle(&x).unwrap();
    assert!(root.distance(&q.mth_root(2).unwrap()).unwrap() < 1e-10);
}

#[test]
fn supertrace_index_examples() {
    let d = Mat::from_real_rows(&[vec![1.0, 0.0]]);
    for t in [0.0, 0.3, 4.0] {
        assert!((supertrace_index(&d, t).unwrap() - c(1.0)).norm() < 1e-12);
    }
    let mut r = rng(71);
    let d = random_matrix(3, 3, 1.0, &mut || r.random::<f64>());
    assert!(supertrace_index(&d, 2.0).unwrap().norm() < 1e-12);

    // 4×6 of rank 3: dim ker D⁺ − dim ker D⁻ = (6 − 3) − (4 − 3) = 2
    let a = random_matrix(4, 3, 1.0, &mut || r.random::<f64>());
    let b = random_matrix(3, 6, 1.0, &mut || r.random::<f64>());
    let d = a.matmul(&b);
    for t in [0.1, 1.0, 7.0] {
        assert!((supertrace_index(&d, t).unwrap() - c(2.0)).norm() < 1e-10);
    }
}

fn odd_connection(beta: usize, scale_b: bool) -> GradedFamily {
    let mut r = rng(81);
    let mut u = || r.random::<f64>();
    let dplus = Mat::from_fn(2, 2, |i, j| if i == j { c(2.0) } else { c(0.0) }).add(&random_matrix(2, 2, 0.3, &mut u));
    let mut a0 = Mat::zeros(4, 4);
    a0.set_block(0, 2, &dplus.adjoint());
    a0.set_block(2, 0, &dplus);
    let a1 = random_matrix(4, 4, 0.4, &mut u).even_part(2);
    let a2 = random_matrix(4, 4, 0.4, &mut u).odd_part(2);
    let form = CForm::scalar(beta, 2, 2, a0).unwrap().with_term(&[1], a1).unwrap().with_term(&[1, 2], a2).unwrap();
    GradedFamily::new(vec![0.0; beta], vec![2.0; beta], 1e-4, (beta, 2, 2), move |b| {
        if scale_b { form.scale(&c(b[0])) } else { form.clone() }
    })
    .unwrap()
}

fn x_family(beta: usize, power: i32) -> GradedFamily {
    let mut r = rng(82);
    let mut u = || r.random::<f64>();
    let x0 = random_matrix(4, 4, 1.0, &mut u);
    let x1 = random_matrix(4, 4, 1.0, &mut u);
    let form = CForm::scalar(beta, 2, 2, x0).unwrap().with_term(&[2], x1).unwrap();
    GradedFamily::new(vec![0.0; beta], vec![2.0; beta], 1e-4, (beta, 2, 2), move |b| form.scale(&c(b[0].powi(power))))
        .unwrap()
}

#[test]
fn dstr_constant_families() {
    let rep = dstr_identity_check(&odd_connection(2, false), &x_family(2, 0), &[1.0, 1.0], 0.2).unwrap();
    assert!(rep.max_residual() < 1e-12, "{rep:?}");
    assert!(rep.max_commutator() < 1e-9, "{rep:?}");
}

#[test]
fn dstr_varying_families() {
    let rep = dstr_identity_check(&odd_connection(2, true), &x_family(2, 2), &[1.0, 1.0], 0.2).unwrap();
    assert!(rep.max_residual() < 1e-7, "{rep:?}");
    assert!(rep.max_commutator() < 1e-9, "{rep:?}");
}

#[test]
fn dstr_rejects_even_connection() {
    let fam = GradedFamily::new(vec![0.0], vec![2.0], 1e-4, (1, 1, 1), |_| CForm::identity(1, 1, 1).unwrap()).unwrap();
    let x = GradedFamily::new(vec![0.0], vec![2.0], 1e-4, (1, 1, 1), |_| CForm::identity(1, 1, 1).unwrap()).unwrap();
    assert!(matches!(dstr_identity_check(&fam, &x, &[1.0], 0.2), Err(CalculusError::ParityMismatch)));
}
