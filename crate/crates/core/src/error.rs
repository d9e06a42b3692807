use thiserror::Error;

/// A named precondition of one of the decision procedures or solvers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Precondition {
    #[error("Slater condition fails: no x with h(x) < 0")]
    SlaterInequality,
    #[error("two-sided Slater condition fails: range of h does not straddle 0")]
    SlaterEquality,
    #[error("interval bounds must satisfy -inf < alpha < beta < +inf")]
    StrictFiniteBounds,
    #[error("bounds must satisfy alpha < beta")]
    StrictBounds,
    #[error("interval Slater condition fails: no x with alpha < h(x) < beta")]
    IntervalSlater,
    #[error("constraint matrix B must be zero")]
    ConstraintMatrixZero,
    #[error("constraint matrix B must be nonzero")]
    ConstraintMatrixNonzero,
    #[error("linear constraint term b must be nonzero")]
    ConstraintLinearNonzero,
    #[error("dual result is not optimal")]
    DualNotOptimal,
    #[error("feasible set does not collapse to a level set of h")]
    NoBoundaryCollapse,
    #[error("instance is infeasible")]
    Infeasible,
    #[error("S-lemma kind `{kind}` requires {requirement}")]
    KindBounds {
        kind: &'static str,
        requirement: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GtrsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid bounds: alpha = {alpha} exceeds beta = {beta}")]
    InvalidBounds { alpha: f64, beta: f64 },
    #[error("precondition violated: {0}")]
    Precondition(#[from] Precondition),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, GtrsError>;
