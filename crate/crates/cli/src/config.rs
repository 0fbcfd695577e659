//! TOML experiment configuration.
//!
//! A file names its `kind`, an optional `seed` and `output_dir`, and carries
//! exactly one section named after the kind. Unknown keys are errors.

use std::path::PathBuf;

use fibertrace::calculus::WaveMethod;
use fibertrace::spa::Fibre;
use fibertrace::symbol::{parse_rational, rational, rational_from_f64, BigRational, TrigPoly};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Invariants,
    Wavetrace,
    Heattrace,
    Spa,
    Pushdown,
    Matrixmodel,
    Ledger,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Invariants => "invariants",
            ExperimentKind::Wavetrace => "wavetrace",
            ExperimentKind::Heattrace => "heattrace",
            ExperimentKind::Spa => "spa",
            ExperimentKind::Pushdown => "pushdown",
            ExperimentKind::Matrixmodel => "matrixmodel",
            ExperimentKind::Ledger => "ledger",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavetrace: Option<WavetraceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heattrace: Option<HeattraceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spa: Option<SpaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pushdown: Option<PushdownConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrixmodel: Option<MatrixModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<LedgerConfig>,
}

/// Exact rational written as an integer, a decimal or `"p/q"` string, or a
/// float (taken at its exact binary value).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Literal {
    pub fn to_rational(&self) -> Result<BigRational, CliError> {
        match self {
            Literal::Int(n) => Ok(rational(*n, 1)),
            Literal::Float(x) => rational_from_f64(*x).map_err(|e| CliError::Validation(e.to_string())),
            Literal::Text(s) => parse_rational(s).map_err(|e| CliError::Validation(format!("{s:?}: {e}"))),
        }
    }
}

/// `w(x) = c₀ + Σ a_k cos kx + Σ b_k sin kx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub constant: Literal,
    #[serde(default)]
    pub cos: Vec<(i64, Literal)>,
    #[serde(default)]
    pub sin: Vec<(i64, Literal)>,
}

impl MetricConfig {
    pub fn trig(&self) -> Result<TrigPoly, CliError> {
        let series = |v: &[(i64, Literal)]| -> Result<Vec<(i64, BigRational)>, CliError> {
            v.iter()
                .map(|(k, c)| if *k < 1 { Err(CliError::Validation(format!("frequency {k} must be ≥ 1"))) } else { Ok((*k, c.to_rational()?)) })
                .collect()
        };
        Ok(TrigPoly::from_real_series(self.constant.to_rational()?, &series(&self.cos)?, &series(&self.sin)?))
    }

    pub fn is_constant(&self) -> bool {
        self.cos.is_empty() && self.sin.is_empty()
    }
}

/// Real series in floating point, for phases and amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<(i64, f64)>,
    #[serde(default)]
    pub sin: Vec<(i64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Geometry {
    Circle { metric: MetricConfig },
    Torus { v1: [f64; 2], v2: [f64; 2] },
    /// Constant metrics with prescribed circumferences over a base grid.
    CircleFamily { base: Vec<f64>, lengths: Vec<f64> },
}

fn default_order() -> usize {
    4
}
fn one_dim() -> usize {
    1
}
fn pairing_tol() -> f64 {
    1e-10
}
fn cancel_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantsConfig {
    #[serde(default = "one_dim")]
    pub dim: usize,
    /// One run per metric.
    pub metrics: Vec<MetricConfig>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "pairing_tol")]
    pub pairing_tolerance: f64,
    #[serde(default = "cancel_tol")]
    pub cancellation_tolerance: f64,
}

fn threshold() -> f64 {
    5.0
}
fn peak_tol() -> f64 {
    1e-2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavetraceConfig {
    pub geometry: Geometry,
    pub sigma: f64,
    pub cutoff: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_step: f64,
    /// Geodesic lengths are listed up to here; defaults to `t_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_length: Option<f64>,
    #[serde(default = "threshold")]
    pub threshold_factor: f64,
    /// Peak-to-length matching window; defaults to `3σ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_window: Option<f64>,
    /// Required `|t_peak − L|`.
    #[serde(default = "peak_tol")]
    pub peak_tolerance: f64,
    /// Number of shortest lengths that must be found; defaults to all in the window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_peaks: Option<usize>,
    /// Length index followed across a family.
    #[serde(default)]
    pub track: usize,
    /// Wall-clock limit in seconds, checked when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit: Option<f64>,
}

fn heat_tol() -> f64 {
    5e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeattraceConfig {
    pub geometry: Geometry,
    pub cutoff: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Relative tolerance of the leading coefficient against the volume.
    #[serde(default = "heat_tol")]
    pub tolerance: f64,
    /// Relative tolerance of the symbolic `a₀` against the spectral fit;
    /// defaults to `1e-3` for constant metrics and `1e-2` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crosscheck_tolerance: Option<f64>,
}

fn spa_r() -> f64 {
    100.0
}
fn spa_rel() -> f64 {
    0.02
}
fn spa_slope() -> f64 {
    0.25
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaMemberConfig {
    pub name: String,
    pub fibre: Fibre,
    pub phase: SeriesConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<SeriesConfig>,
    pub ladder: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaConfig {
    #[serde(default = "spa_r")]
    pub r: f64,
    #[serde(default = "spa_rel")]
    pub rel_tolerance: f64,
    #[serde(default = "spa_slope")]
    pub slope_tolerance: f64,
    #[serde(default = "yes")]
    pub reference_corpus: bool,
    #[serde(default)]
    pub members: Vec<SpaMemberConfig>,
}

fn folds() -> Vec<u32> {
    vec![1, 2, 3]
}
fn push_tol() -> f64 {
    1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushdownConfig {
    pub base: Vec<f64>,
    pub scales: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centres: Option<Vec<f64>>,
    #[serde(default = "folds")]
    pub folds: Vec<u32>,
    #[serde(default = "push_tol")]
    pub tolerance: f64,
}

fn fifty() -> usize {
    50
}
fn twenty() -> usize {
    20
}
fn six() -> usize {
    6
}
fn three() -> usize {
    3
}
fn edge_points() -> usize {
    512
}
fn mm_tol() -> f64 {
    1e-9
}
fn contour_tol() -> f64 {
    1e-6
}
fn dstr_tol() -> f64 {
    1e-6
}
fn fd_step() -> f64 {
    1e-4
}
fn index_tol() -> f64 {
    1e-10
}
fn budget() -> f64 {
    60.0
}
fn exact() -> WaveMethod {
    WaveMethod::ExactDividedDifferences
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixModelConfig {
    #[serde(default = "fifty")]
    pub operators: usize,
    #[serde(default = "six")]
    pub max_dim: usize,
    #[serde(default = "three")]
    pub max_beta: usize,
    #[serde(default = "edge_points")]
    pub points_per_edge: usize,
    #[serde(default = "mm_tol")]
    pub tolerance: f64,
    #[serde(default = "contour_tol")]
    pub contour_tolerance: f64,
    #[serde(default = "twenty")]
    pub dplus_samples: usize,
    #[serde(default = "index_tol")]
    pub index_tolerance: f64,
    #[serde(default = "three")]
    pub dstr_samples: usize,
    #[serde(default = "fd_step")]
    pub fd_step: f64,
    #[serde(default = "dstr_tol")]
    pub dstr_tolerance: f64,
    #[serde(default = "mm_tol")]
    pub commutator_tolerance: f64,
    /// Route for the Duhamel wave operator.
    #[serde(default = "exact")]
    pub wave_method: WaveMethod,
    /// Wall-clock limit for the operator battery, seconds.
    #[serde(default = "budget")]
    pub time_limit: f64,
}

/// Component order, or `"none"` when the component vanishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderLiteral {
    Order(u32),
    Absent(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerConfig {
    pub q: u32,
    pub m: u32,
    /// Orders of the degree-1, 2, … components.
    pub orders: Vec<OrderLiteral>,
    pub d: usize,
    pub codims: Vec<u32>,
    pub v_max: u32,
    #[serde(default = "yes")]
    pub enforce_order_bound: bool,
    /// Also sweep every order signature with orders ≤ m up to this base
    /// dimension, all d ≤ β.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustive_beta: Option<usize>,
}

impl LedgerConfig {
    pub fn order_list(&self) -> Result<Vec<Option<u32>>, CliError> {
        self.orders
            .iter()
            .map(|o| match o {
                OrderLiteral::Order(n) => Ok(Some(*n)),
                OrderLiteral::Absent(s) if s == "none" => Ok(None),
                OrderLiteral::Absent(s) => Err(CliError::Validation(format!("order {s:?} is neither an integer nor \"none\""))),
            })
            .collect()
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
    (line, col)
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be positive, got {v}")))
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        Err(CliError::Validation(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    /// Malformed TOML is a [`CliError::Parse`]; well-formed TOML that does
    /// not fit the schema (unknown keys, wrong types) is a
    /// [`CliError::Validation`]. Both carry the line and column.
    pub fn parse(src: &str) -> Result<Self, CliError> {
        let position = |e: &toml::de::Error| e.span().map(|s| line_col(src, s.start)).unwrap_or((0, 0));
        src.parse::<toml::Table>().map_err(|e| {
            let (line, column) = position(&e);
            CliError::Parse { line, column, message: e.message().to_string() }
        })?;
        toml::from_str(src).map_err(|e| {
            let (line, column) = position(&e);
            CliError::Validation(format!("line {line}, column {column}: {}", e.message()))
        })
    }

    /// Canonical TOML with every default filled in.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config types serialise")
    }

    fn sections(&self) -> Vec<ExperimentKind> {
        let mut out = Vec::new();
        let present = [
            (self.invariants.is_some(), ExperimentKind::Invariants),
            (self.wavetrace.is_some(), ExperimentKind::Wavetrace),
            (self.heattrace.is_some(), ExperimentKind::Heattrace),
            (self.spa.is_some(), ExperimentKind::Spa),
            (self.pushdown.is_some(), ExperimentKind::Pushdown),
            (self.matrixmodel.is_some(), ExperimentKind::Matrixmodel),
            (self.ledger.is_some(), ExperimentKind::Ledger),
        ];
        for (p, k) in present {
            if p {
                out.push(k);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let sections = self.sections();
        if sections != [self.kind] {
            return Err(CliError::Validation(format!(
                "kind = \"{}\" needs exactly the [{}] section, found {:?}",
                self.kind.name(),
                self.kind.name(),
                sections.iter().map(|k| k.name()).collect::<Vec<_>>()
            )));
        }
        if let Some(c) = &self.invariants {
            nonempty("invariants.metrics", &c.metrics)?;
            positive("invariants.pairing_tolerance", c.pairing_tolerance)?;
            positive("invariants.cancellation_tolerance", c.cancellation_tolerance)?;
            if !(1..=2).contains(&c.dim) {
                return Err(CliError::Validation(format!("invariants.dim must be 1 or 2, got {}", c.dim)));
            }
        }
        if let Some(c) = &self.wavetrace {
            validate_geometry(&c.geometry)?;
            for (n, v) in [("sigma", c.sigma), ("cutoff", c.cutoff), ("t_step", c.t_step), ("threshold_factor", c.threshold_factor), ("peak_tolerance", c.peak_tolerance)] {
                positive(&format!("wavetrace.{n}"), v)?;
            }
            if let Some(w) = c.match_window {
                positive("wavetrace.match_window", w)?;
            }
            if !(c.t_max > c.t_min) {
                return Err(CliError::Validation("wavetrace.t_max must exceed t_min".into()));
            }
            if (c.t_max - c.t_min) / c.t_step > 1e7 {
                return Err(CliError::Validation("wavetrace t-grid has more than 1e7 points".into()));
            }
        }
        if let Some(c) = &self.heattrace {
            validate_geometry(&c.geometry)?;
            if matches!(c.geometry, Geometry::CircleFamily { .. }) {
                return Err(CliError::Validation("heattrace takes a single circle or torus".into()));
            }
            positive("heattrace.cutoff", c.cutoff)?;
            positive("heattrace.t_min", c.t_min)?;
            positive("heattrace.tolerance", c.tolerance)?;
            if let Some(t) = c.crosscheck_tolerance {
                positive("heattrace.crosscheck_tolerance", t)?;
            }
            if !(c.t_max > c.t_min) {
                return Err(CliError::Validation("heattrace.t_max must exceed t_min".into()));
            }
        }
        if let Some(c) = &self.spa {
            positive("spa.r", c.r)?;
            positive("spa.rel_tolerance", c.rel_tolerance)?;
            positive("spa.slope_tolerance", c.slope_tolerance)?;
            if !c.reference_corpus && c.members.is_empty() {
                return Err(CliError::Validation("spa needs the reference corpus or at least one member".into()));
            }
        }
        if let Some(c) = &self.pushdown {
            nonempty("pushdown.base", &c.base)?;
            nonempty("pushdown.folds", &c.folds)?;
            if c.scales.len() != c.base.len() || c.centres.as_ref().is_some_and(|m| m.len() != c.base.len()) {
                return Err(CliError::Validation("pushdown.scales/centres must match pushdown.base".into()));
            }
            positive("pushdown.tolerance", c.tolerance)?;
            if c.folds.contains(&0) {
                return Err(CliError::Validation("pushdown.folds must be ≥ 1".into()));
            }
        }
        if let Some(c) = &self.matrixmodel {
            for (n, v) in [
                ("tolerance", c.tolerance),
                ("contour_tolerance", c.contour_tolerance),
                ("index_tolerance", c.index_tolerance),
                ("fd_step", c.fd_step),
                ("dstr_tolerance", c.dstr_tolerance),
                ("commutator_tolerance", c.commutator_tolerance),
                ("time_limit", c.time_limit),
            ] {
                positive(&format!("matrixmodel.{n}"), v)?;
            }
            if !(2..=8).contains(&c.max_dim) || !(1..=fibertrace::graded::MAX_BASE_DIM).contains(&c.max_beta) {
                return Err(CliError::Validation("matrixmodel.max_dim must be in 2..=8 and max_beta in 1..=MAX_BASE_DIM".into()));
            }
        }
        if let Some(c) = &self.ledger {
            c.order_list()?;
            nonempty("ledger.codims", &c.codims)?;
        }
        Ok(())
    }
}

fn validate_geometry(g: &Geometry) -> Result<(), CliError> {
    match g {
        Geometry::Circle { metric } => {
            metric.trig()?;
        }
        Geometry::Torus { .. } => {}
        Geometry::CircleFamily { base, lengths } => {
            nonempty("geometry.base", base)?;
            if base.len() != lengths.len() {
                return Err(CliError::Validation("geometry.lengths must match geometry.base".into()));
            }
            for l in lengths {
                positive("geometry.lengths", *l)?;
            }
        }
    }
    Ok(())
}
