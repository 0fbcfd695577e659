//! Leading-order vertical stationary phase on circle and torus fibres.
//!
//! Phases are real trigonometric polynomials in the first fibre coordinate.
//! On a torus fibre the critical set of such a phase is a union of circles
//! `{x_c} × S¹`, which is the Bott–Morse case.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::symbol::NumericTrig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaError {
    #[error("frequency parameter must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("phase takes complex values (imaginary part {0:e})")]
    ComplexPhase(f64),
    #[error("degenerate critical point at x = {x}: second derivative {second:e}")]
    Degenerate { x: f64, second: f64 },
    #[error("amplitude depends on the second coordinate but the fibre is a circle")]
    FibreMismatch,
    #[error("oscillatory quadrature did not settle: {points} points, last change {change:e}")]
    NonConvergence { points: usize, change: f64 },
    #[error("rate fit needs at least three geometric frequencies")]
    RateList,
    #[error("base grid and member list differ in length")]
    BaseGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fibre {
    Circle,
    Torus,
}

/// Amplitude on the fibre, written in modes `e^{i(kx + ly)}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Amplitude {
    /// `Σ c_{kl} e^{i(kx+ly)}`.
    Trig(Vec<((i64, i64), Complex64)>),
    /// `exp` of the trigonometric polynomial.
    ExpTrig(Vec<((i64, i64), Complex64)>),
}

impl Amplitude {
    pub fn one() -> Self {
        Amplitude::Trig(vec![((0, 0), Complex64::new(1.0, 0.0))])
    }

    /// Lifts a function of `x` alone.
    pub fn from_circle(q: &NumericTrig) -> Self {
        Amplitude::Trig(q.terms().iter().map(|&(k, c)| ((k, 0), c)).collect())
    }

    fn terms(&self) -> &[((i64, i64), Complex64)] {
        match self {
            Amplitude::Trig(t) | Amplitude::ExpTrig(t) => t,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let s: Complex64 =
            self.terms().iter().map(|&((k, l), c)| c * Complex64::new(0.0, k as f64 * x + l as f64 * y).exp()).sum();
        match self {
            Amplitude::Trig(_) => s,
            Amplitude::ExpTrig(_) => s.exp(),
        }
    }

    fn depends_on_y(&self) -> bool {
        self.terms().iter().any(|((_, l), c)| *l != 0 && c.norm() > 0.0)
    }

    /// Largest `|l|`, the bandwidth in the second coordinate before any `exp`.
    fn y_frequency(&self) -> i64 {
        self.terms().iter().map(|((_, l), _)| l.abs()).max().unwrap_or(0)
    }
}

/// Phase and amplitude on a single fibre.
#[derive(Clone, Debug, PartialEq)]
pub struct FibrePhase {
    fibre: Fibre,
    phase: NumericTrig,
    amplitude: Amplitude,
}

impl FibrePhase {
    pub fn new(fibre: Fibre, phase: NumericTrig, amplitude: Amplitude) -> Result<Self, SpaError> {
        let n = 64 * (phase.max_frequency() as usize + 1);
        let imag = (0..n)
            .map(|i| phase.eval(2.0 * PI * i as f64 / n as f64).im.abs())
            .fold(0.0, f64::max);
        if imag > 1e-12 * (1.0 + phase.terms().iter().map(|(_, c)| c.norm()).sum::<f64>()) {
            return Err(SpaError::ComplexPhase(imag));
        }
        if fibre == Fibre::Circle && amplitude.depends_on_y() {
            return Err(SpaError::FibreMismatch);
        }
        Ok(FibrePhase { fibre, phase, amplitude })
    }

    pub fn fibre(&self) -> Fibre {
        self.fibre
    }

    pub fn phase(&self) -> &NumericTrig {
        &self.phase
    }

    pub fn amplitude(&self) -> &Amplitude {
        &self.amplitude
    }

    /// `x → x + c` applied to phase and amplitude together.
    pub fn translated(&self, c: f64) -> FibrePhase {
        let shift = |t: &[((i64, i64), Complex64)]| -> Vec<_> {
            t.iter().map(|&((k, l), v)| ((k, l), v * Complex64::new(0.0, k as f64 * c).exp())).collect()
        };
        let amplitude = match &self.amplitude {
            Amplitude::Trig(t) => Amplitude::Trig(shift(t)),
            Amplitude::ExpTrig(t) => Amplitude::ExpTrig(shift(t)),
        };
        FibrePhase { fibre: self.fibre, phase: self.phase.shifted(c), amplitude }
    }

    pub fn negated(&self) -> FibrePhase {
        FibrePhase { phase: self.phase.scaled(-1.0), ..self.clone() }
    }
}

/// A family of fibre phases over a base grid.
#[derive(Clone, Debug)]
pub struct FiberedPhase {
    base: Vec<f64>,
    members: Vec<FibrePhase>,
}

impl FiberedPhase {
    pub fn new(base: Vec<f64>, members: Vec<FibrePhase>) -> Result<Self, SpaError> {
        if base.len() != members.len() || base.is_empty() {
            return Err(SpaError::BaseGrid);
        }
        Ok(FiberedPhase { base, members })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn member(&self, i: usize) -> &FibrePhase {
        &self.members[i]
    }

    /// Leading term and oracle at each base point.
    pub fn sweep(&self, r: f64) -> Result<Vec<(SpaValue, Complex64)>, SpaError> {
        self.members.par_iter().map(|m| Ok((spa_leading(m, r)?, oscillatory_oracle(m, r)?))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CriticalLocus {
    Point { x: f64 },
    /// `{x} × S¹` inside a torus fibre.
    Circle { x: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalComponent {
    pub locus: CriticalLocus,
    pub codim: u32,
    pub hessian: f64,
    pub signature: i32,
    pub value: f64,
}

impl CriticalComponent {
    pub fn x(&self) -> f64 {
        match self.locus {
            CriticalLocus::Point { x } | CriticalLocus::Circle { x } => x,
        }
    }
}

fn real_derivative(phase: &NumericTrig, m: u32, x: f64) -> f64 {
    phase.derivative_at(m, x).re
}

/// Zeros of `φ′` on the circle, polished by safeguarded Newton.
pub fn find_critical_set(p: &FibrePhase) -> Result<Vec<CriticalComponent>, SpaError> {
    let phase = &p.phase;
    let scale2: f64 = phase.terms().iter().map(|(k, c)| (k * k) as f64 * c.norm()).sum();
    let scale1 = phase.derivative_bound();
    let n = 256 * (phase.max_frequency() as usize + 1);
    let h = 2.0 * PI / n as f64;
    let d1 = |x: f64| real_derivative(phase, 1, x);
    let d2 = |x: f64| real_derivative(phase, 2, x);
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| d1(x)).collect();

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..n {
        let (a, fa, fb) = (xs[i], fs[i], fs[(i + 1) % n]);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(polish(&d1, &d2, a, a + h, fa));
        } else {
            // touching zero without a sign change
            let prev = fs[(i + n - 1) % n];
            if prev * fa > 0.0 && fa.abs() <= prev.abs() && fa.abs() <= fb.abs() {
                let x = golden_min(|x| d1(x).abs(), a - h, a + h);
                if d1(x).abs() < 1e-10 * scale1.max(1e-300) {
                    return Err(SpaError::Degenerate { x: x.rem_euclid(2.0 * PI), second: d2(x) });
                }
            }
        }
    }
    let mut out = Vec::with_capacity(roots.len());
    for x in roots {
        let x = x.rem_euclid(2.0 * PI);
        let second = d2(x);
        if second.abs() < 1e-6 * scale2.max(1e-300) {
            return Err(SpaError::Degenerate { x, second });
        }
        let locus = match p.fibre {
            Fibre::Circle => CriticalLocus::Point { x },
            Fibre::Torus => CriticalLocus::Circle { x },
        };
        out.push(CriticalComponent { locus, codim: 1, hessian: second, signature: second.signum() as i32, value: phase.eval_real(x) });
    }
    out.sort_by(|a, b| a.x().total_cmp(&b.x()));
    out.dedup_by(|a, b| (a.x() - b.x()).abs() < 1e-10);
    Ok(out)
}

fn polish(f: &dyn Fn(f64) -> f64, df: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == (flo < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / df(x);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() < 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    for _ in 0..120 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

/// Periodic trapezoid, doubled until successive values agree to `tol`.
fn periodic_trapezoid(f: impl Fn(f64) -> Complex64, start: usize, tol: f64) -> Result<Complex64, SpaError> {
    let sum = |n: usize| (0..n).map(|i| f(2.0 * PI * i as f64 / n as f64)).sum::<Complex64>() * (2.0 * PI / n as f64);
    let mut n = start.max(8);
    let mut prev = sum(n);
    loop {
        n *= 2;
        let cur = sum(n);
        let change = (cur - prev).norm();
        if change <= tol {
            return Ok(cur);
        }
        if n >= 1 << 22 {
            return Err(SpaError::NonConvergence { points: n, change });
        }
        prev = cur;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaValue {
    pub total: Complex64,
    pub components: Vec<(CriticalComponent, Complex64)>,
}

/// `Σ_i (2π/r)^{n_i/2} e^{iπ sgn/4} e^{irφ(W_i)} ∫_{W_i} q |Hess|^{−1/2}`.
pub fn spa_leading(p: &FibrePhase, r: f64) -> Result<SpaValue, SpaError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(SpaError::NonPositiveFrequency(r));
    }
    let crit = find_critical_set(p)?;
    let mut components = Vec::with_capacity(crit.len());
    for c in crit {
        let x = c.x();
        let density = match p.fibre {
            Fibre::Circle => p.amplitude.eval(x, 0.0),
            Fibre::Torus => {
                let start = 4 * (p.amplitude.y_frequency() as usize + 1);
                periodic_trapezoid(|y| p.amplitude.eval(x, y), start, 1e-15)?
            }
        } / c.hessian.abs().sqrt();
        let prefactor = (2.0 * PI / r).powf(c.codim as f64 / 2.0)
            * Complex64::new(0.0, PI * c.signature as f64 / 4.0 + r * c.value).exp();
        components.push((c, prefactor * density));
    }
    Ok(SpaValue { total: components.iter().map(|(_, v)| v).sum(), components })
}

/// Brute-force `∫ e^{irφ} q` over the fibre by the periodic trapezoid rule.
pub fn oscillatory_oracle(p: &FibrePhase, r: f64) -> Result<Complex64, SpaError> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(SpaError::NonPositiveFrequency(r));
    }
    let min_points = (40.0 * r.sqrt()).ceil() as usize;
    let bandwidth = r * p.phase.derivative_bound();
    let nx = min_points.max((2.0 * bandwidth) as usize + 64);
    // rows in parallel, summed in a fixed order
    let rows = |n: usize, ny: usize| -> Complex64 {
        let h = 2.0 * PI / n as f64;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let x = i as f64 * h;
                let osc = Complex64::new(0.0, r * p.phase.eval_real(x)).exp();
                let fibre: Complex64 = match p.fibre {
                    Fibre::Circle => p.amplitude.eval(x, 0.0),
                    Fibre::Torus => {
                        let hy = 2.0 * PI / ny as f64;
                        (0..ny).map(|j| p.amplitude.eval(x, j as f64 * hy)).sum::<Complex64>() * hy
                    }
                };
                osc * fibre
            })
            .collect::<Vec<_>>()
            .iter()
            .sum::<Complex64>()
            * h
    };
    let ny0 = min_points.max(4 * (p.amplitude.y_frequency() as usize + 1)).max(16);
    let (mut n, mut ny) = (nx, ny0);
    let mut prev = rows(n, ny);
    let scale = prev.norm().max(1.0);
    loop {
        n *= 2;
        if p.fibre == Fibre::Torus {
            ny *= 2;
        }
        let cur = rows(n, ny);
        let change = (cur - prev).norm();
        if change <= 1e-10 * scale {
            return Ok(cur);
        }
        if n >= 1 << 22 {
            return Err(SpaError::NonConvergence { points: n, change });
        }
        prev = cur;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub r: Vec<f64>,
    pub errors: Vec<f64>,
    /// Error sits at the oracle's resolution for these frequencies.
    pub below_floor: Vec<bool>,
    /// Least-squares slope of `log error` against `log r`; `None` when fewer
    /// than three points clear the floor.
    pub slope: Option<f64>,
    pub expected: f64,
}

impl RateReport {
    pub fn within(&self, tol: f64) -> bool {
        self.slope.is_some_and(|s| (s - self.expected).abs() <= tol)
    }
}

/// Absolute error floor of the comparison.
pub const ERROR_FLOOR: f64 = 1e-9;

/// Fits `|oracle − leading| ∝ r^{slope}` over a geometric list of `r`.
pub fn convergence_rate_check(p: &FibrePhase, r_list: &[f64]) -> Result<RateReport, SpaError> {
    if r_list.len() < 3 {
        return Err(SpaError::RateList);
    }
    let ratio = r_list[1] / r_list[0];
    if !(ratio > 1.0) || r_list.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) {
        return Err(SpaError::RateList);
    }
    let crit = find_critical_set(p)?;
    let codim = crit.iter().map(|c| c.codim).max().unwrap_or(1);
    let errors: Vec<f64> = r_list
        .par_iter()
        .map(|&r| Ok((oscillatory_oracle(p, r)? - spa_leading(p, r)?.total).norm()))
        .collect::<Result<_, SpaError>>()?;
    let below_floor: Vec<bool> = errors.iter().map(|e| *e < ERROR_FLOOR).collect();
    let pts: Vec<(f64, f64)> =
        r_list.iter().zip(&errors).zip(&below_floor).filter(|(_, b)| !**b).map(|((r, e), _)| (r.ln(), e.ln())).collect();
    let slope = (pts.len() >= 3).then(|| {
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(RateReport { r: r_list.to_vec(), errors, below_floor, slope, expected: -(codim as f64 / 2.0 + 1.0) })
}

pub struct CorpusEntry {
    pub name: &'static str,
    pub phase: FibrePhase,
    /// Geometric frequency ladder for the remainder fit.
    pub ladder: Vec<f64>,
}

/// Morse and Bott–Morse phases used for regression and acceptance runs.
///
/// With critical values `±1` the ladder `2π·2^j` keeps `e^{irφ(W)}` fixed;
/// phases whose critical values are not commensurate get a denser, longer
/// ladder so the beating between components averages out of the fit.
pub fn reference_corpus() -> Vec<CorpusEntry> {
    let c = |v: f64| Complex64::new(v, 0.0);
    let cos_x = NumericTrig::from_terms(vec![(1, c(0.5)), (-1, c(0.5))]);
    // cos x + 0.3 sin 2x
    let tilted = NumericTrig::from_terms(vec![
        (1, c(0.5)),
        (-1, c(0.5)),
        (2, Complex64::new(0.0, -0.15)),
        (-2, Complex64::new(0.0, 0.15)),
    ]);
    let bumped = Amplitude::Trig(vec![((0, 0), c(1.0)), ((1, 0), c(0.1)), ((-1, 0), c(0.1))]);
    let around = Amplitude::Trig(vec![((0, 0), c(1.0)), ((0, 1), c(0.25)), ((0, -1), c(0.25))]);
    let mixed = Amplitude::Trig(vec![((0, 0), c(1.0)), ((1, 1), c(0.1)), ((-1, -1), c(0.1))]);
    let build = |f, p: &NumericTrig, a: Amplitude| FibrePhase::new(f, p.clone(), a).expect("corpus phase is real");
    let dyadic: Vec<f64> = (3..8).map(|j| 2.0 * PI * 2f64.powi(j)).collect();
    let dense: Vec<f64> = (0..11).map(|k| 50.0 * 2f64.powf(k as f64 / 2.0)).collect();
    let entry = |name, phase, ladder: &Vec<f64>| CorpusEntry { name, phase, ladder: ladder.clone() };
    vec![
        entry("circle-cos", build(Fibre::Circle, &cos_x, Amplitude::one()), &dyadic),
        entry("circle-tilted", build(Fibre::Circle, &tilted, bumped), &dense),
        entry("torus-cos", build(Fibre::Torus, &cos_x, around), &dyadic),
        entry("torus-tilted", build(Fibre::Torus, &tilted, mixed), &dense),
    ]
}
