//! One module per experiment kind; each turns its config section into an
//! [`Outcome`](crate::Outcome).

use fibertrace::symbol::NumericTrig;
use fibertrace::Complex64;

use crate::config::SeriesConfig;

pub mod heattrace;
pub mod invariants;
pub mod ledger;
pub mod matrixmodel;
pub mod pushdown;
pub mod spa;
pub mod wavetrace;

/// `lo, lo + step, …` up to `hi` inclusive (rounded to the nearest step).
pub(crate) fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

pub(crate) fn series(s: &SeriesConfig) -> NumericTrig {
    let mut terms = vec![(0, Complex64::new(s.constant, 0.0))];
    for &(k, a) in &s.cos {
        terms.push((k, Complex64::new(a / 2.0, 0.0)));
        terms.push((-k, Complex64::new(a / 2.0, 0.0)));
    }
    for &(k, b) in &s.sin {
        terms.push((k, Complex64::new(0.0, -b / 2.0)));
        terms.push((-k, Complex64::new(0.0, b / 2.0)));
    }
    NumericTrig::from_terms(terms)
}
