use fibertrace::graded::{BoundaryRule, GradedError, GradedFamily, MultiIndex};
use fibertrace::{CForm, Complex64, Mat, QForm};
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use proptest::prelude::*;

type Q = Complex<BigRational>;

fn q(num: i64, den: i64) -> Q {
    Complex::new(BigRational::new(BigInt::from(num), BigInt::from(den)), BigRational::from_integer(BigInt::from(0)))
}

fn qc(re: i64, im: i64) -> Q {
    Complex::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Random exact form over β=3 with an `N⁺|N⁻ = 2|1` grading.
fn exact_form() -> impl Strategy<Value = QForm> {
    let entry = (-3i64..=3, -3i64..=3);
    proptest::collection::vec(proptest::collection::vec(entry, 9), 8).prop_map(|terms| {
        let mut f = QForm::zero(3, 2, 1).unwrap();
        for (mask, entries) in terms.into_iter().enumerate() {
            let m = Mat::from_fn(3, 3, |i, j| {
                let (re, im) = entries[3 * i + j];
                qc(re, im)
            });
            f = f.with_index(MultiIndex::from_mask(mask as u8), m).unwrap();
        }
        f
    })
}

fn nilpotent_form() -> impl Strategy<Value = QForm> {
    exact_form().prop_map(|f| f.positive_part())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wedge_compose_is_associative(a in exact_form(), b in exact_form(), c in exact_form()) {
        let left = a.wedge_compose(&b).unwrap().wedge_compose(&c).unwrap();
        let right = a.wedge_compose(&b.wedge_compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left.pruned(), right.pruned());
    }

    #[test]
    fn supertrace_kills_graded_commutators(x in exact_form(), y in exact_form()) {
        let comm = x.supercommutator(&y).unwrap();
        for (_, v) in comm.supertrace() {
            prop_assert_eq!(v, qc(0, 0));
        }
    }

    #[test]
    fn rescaling_composes_and_is_multiplicative(x in exact_form(), y in exact_form(), s in 1i64..5, t in -4i64..=-1) {
        let (s, t) = (q(s, 3), q(t, 2));
        let st = s.clone() * t.clone();
        let lhs = x.delta_t_rescale(&t).unwrap().delta_t_rescale(&s).unwrap();
        prop_assert_eq!(lhs.pruned(), x.delta_t_rescale(&st).unwrap().pruned());
        let prod = x.wedge_compose(&y).unwrap().delta_t_rescale(&t).unwrap();
        let split = x.delta_t_rescale(&t).unwrap().wedge_compose(&y.delta_t_rescale(&t).unwrap()).unwrap();
        prop_assert_eq!(prod.pruned(), split.pruned());
    }

    #[test]
    fn positive_degree_forms_are_nilpotent(x in nilpotent_form()) {
        prop_assert!(x.pow(4).unwrap().is_zero());
    }
}

#[test]
fn identity_is_neutral() {
    let x = QForm::zero(2, 1, 1).unwrap().with_term(&[2], Mat::from_fn(2, 2, |i, j| qc(i as i64 + 1, j as i64))).unwrap();
    let id = QForm::identity(2, 1, 1).unwrap();
    assert_eq!(id.wedge_compose(&x).unwrap(), x);
    assert_eq!(x.wedge_compose(&id).unwrap(), x);
}

#[test]
fn supertrace_examples() {
    let id = QForm::identity(0, 2, 1).unwrap();
    assert_eq!(id.supertrace()[&MultiIndex::EMPTY], qc(1, 0));
    let equal_blocks = QForm::zero(1, 1, 1).unwrap().with_term(&[1], Mat::diag(&[qc(3, 0), qc(3, 0)])).unwrap();
    assert_eq!(equal_blocks.supertrace()[&MultiIndex::single(1)], qc(0, 0));
}

#[test]
fn rescale_identity_and_errors() {
    let x = QForm::zero(2, 1, 0).unwrap().with_term(&[1], Mat::diag(&[qc(5, 1)])).unwrap();
    assert_eq!(x.delta_t_rescale(&qc(1, 0)).unwrap(), x);
    assert_eq!(x.delta_t_rescale(&qc(0, 0)), Err(GradedError::ZeroRescale));
    // conjugation variant on a degree-2 term, t = 2 → one half
    let b2 = QForm::zero(2, 1, 0).unwrap().with_term(&[1, 2], Mat::diag(&[qc(1, 0)])).unwrap();
    let r = b2.conjugation_rescale(&qc(2, 0)).unwrap();
    assert_eq!(r.term(MultiIndex::from_mask(3)).unwrap()[(0, 0)], q(1, 2));
}

#[test]
fn dimension_mismatch_is_reported() {
    let a = QForm::identity(2, 1, 0).unwrap();
    let b = QForm::identity(2, 2, 0).unwrap();
    assert!(matches!(a.wedge_compose(&b), Err(GradedError::DimensionMismatch { .. })));
    assert!(matches!(QForm::zero(9, 1, 0), Err(GradedError::BaseDimTooLarge(9))));
}

fn matrix_a() -> Mat<Complex64> {
    Mat::from_real_rows(&[vec![1.0, -2.0], vec![0.5, 3.0]])
}

#[test]
fn numeric_d_b_constant_and_linear() {
    let a = matrix_a();
    let constant = {
        let a = a.clone();
        GradedFamily::new(vec![0.0], vec![2.0], 1e-3, (1, 2, 0), move |_| CForm::scalar(1, 2, 0, a.clone()).unwrap()).unwrap()
    };
    assert!(constant.numeric_d_b(&[1.0], BoundaryRule::Reject).unwrap().max_abs() == 0.0);

    let linear = {
        let a = a.clone();
        GradedFamily::new(vec![0.0], vec![2.0], 1e-3, (1, 2, 0), move |b| CForm::scalar(1, 2, 0, a.scale(&c(b[0]))).unwrap()).unwrap()
    };
    let d = linear.numeric_d_b(&[1.0], BoundaryRule::Reject).unwrap();
    assert!(d.coefficient(MultiIndex::single(1)).sub(&a).max_abs() < 1e-12);
    assert!(d.coefficient(MultiIndex::EMPTY).max_abs() == 0.0);
}

#[test]
fn numeric_d_b_quadratic() {
    let a = matrix_a();
    let fam = {
        let a = a.clone();
        GradedFamily::new(vec![0.0], vec![2.0], 1e-4, (1, 2, 0), move |b| CForm::scalar(1, 2, 0, a.scale(&c(b[0] * b[0]))).unwrap()).unwrap()
    };
    let d = fam.numeric_d_b(&[1.0], BoundaryRule::Reject).unwrap();
    assert!(d.coefficient(MultiIndex::single(1)).sub(&a.scale(&c(2.0))).max_abs() < 1e-8);
}

#[test]
fn numeric_d_b_boundary_rules() {
    let fam = GradedFamily::new(vec![0.0, 0.0], vec![1.0, 1.0], 1e-3, (2, 1, 0), |b| {
        CForm::scalar(2, 1, 0, Mat::diag(&[c(b[0] * b[1] + b[1].powi(3))])).unwrap()
    })
    .unwrap();
    assert!(matches!(fam.numeric_d_b(&[0.0, 0.5], BoundaryRule::Reject), Err(GradedError::BoundaryPoint { coordinate: 1, .. })));
    let d = fam.numeric_d_b(&[0.0, 0.5], BoundaryRule::OneSided).unwrap();
    // ∂_{b1} = b2 = 0.5, ∂_{b2} = b1 + 3 b2² = 0.75
    assert!((d.coefficient(MultiIndex::single(1))[(0, 0)] - c(0.5)).norm() < 1e-6);
    assert!((d.coefficient(MultiIndex::single(2))[(0, 0)] - c(0.75)).norm() < 1e-5);
}

#[test]
fn higher_degree_d_b_wedges_in_front() {
    // x(b) = b1·db2 ⊗ 1, so d_B x = db1 ∧ db2
    let fam = GradedFamily::new(vec![0.0, 0.0], vec![2.0, 2.0], 1e-3, (2, 1, 0), |b| {
        CForm::zero(2, 1, 0).unwrap().with_term(&[2], Mat::diag(&[c(b[0])])).unwrap()
    })
    .unwrap();
    let d = fam.numeric_d_b(&[1.0, 1.0], BoundaryRule::Reject).unwrap();
    assert!((d.coefficient(MultiIndex::from_mask(3))[(0, 0)] - c(1.0)).norm() < 1e-12);
}
