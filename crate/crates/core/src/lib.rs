//! Certified solver for the interval-bounded generalized trust region
//! subproblem
//!
//! ```text
//! inf f(x)  s.t.  alpha ≤ h(x) ≤ beta,   f, h quadratic,
//! ```
//!
//! together with decision procedures (with certificates) for the inequality,
//! equality and interval S-lemmas.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod degenerate;
pub mod dual;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod range;
pub mod recovery;
pub mod slemma;
pub mod solver;

pub use error::{GtrsError, Precondition, Result};
pub use model::{
    verify_certificate, Certificate, DualResult, DualStatus, GtrsInstance, MuInterval, QuadRange,
    Quadratic, SymMatrix,
};
