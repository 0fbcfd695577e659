//! Exact symbol calculus for Laplace-type operators on circle fibres and
//! flat models, with the invariants derived from it.

mod invariants;
mod ledger;
mod parametrix;
mod ring;
mod trig;

pub use invariants::{
    complex_power_weight, exponential_weight, heat_invariants_b, invariant_table, moment_integral, sphere_monomial_integral, sqrt_resolvent, wave_invariants_a,
    InvariantTable, SqrtResolventTerm, ZetaPole,
};
pub use ledger::{singularity_ledger, LedgerQuery, PartitionBlock, SingularityLedgerEntry};
pub use parametrix::{parametrix_recursion, telescoping_check, Parametrix, ResolventTerm, TelescopeReport, MAX_ORDER};
pub use ring::{laplace_symbol, LaplaceOperatorSpec, LaplaceSymbol, Symbol, SymbolRing};
pub use trig::{cq, cq_int, cq_real, cq_to_f64, parse_rational, rational, rational_from_f64, NumericTrig, TrigPoly, CQ};
pub use num_rational::{BigRational, Rational64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolError {
    #[error("metric coefficient is not positive (certified lower bound {0:e})")]
    NonPositiveMetric(f64),
    #[error("metric coefficient has non-conjugate-symmetric Fourier coefficients")]
    ComplexMetric,
    #[error("fibre dimension {0} is unsupported")]
    FibreDimension(usize),
    #[error("fibre dimension {0} needs a constant metric coefficient")]
    CurvedHigherDimension(usize),
    #[error("truncation order {requested} exceeds the exact-arithmetic budget {max}")]
    OrderTooLarge { requested: usize, max: usize },
    #[error("term of r_{{-2-{j}}} has ξ-degree {xi} and pole order {pole}, breaking homogeneity")]
    Homogeneity { j: usize, xi: u32, pole: i32 },
    #[error("x-quadrature did not converge; grid history {history:?}")]
    QuadratureNonConvergence { history: Vec<(usize, f64)> },
    #[error("Γ has a pole at {0}")]
    GammaPole(f64),
    #[error("non-finite literal {0}")]
    NonFinite(f64),
    #[error("malformed rational literal {0:?}")]
    BadLiteral(String),
    #[error("ledger query admits no partitions")]
    EmptyLedger,
    #[error("ledger query invalid: {0}")]
    LedgerQuery(&'static str),
}
