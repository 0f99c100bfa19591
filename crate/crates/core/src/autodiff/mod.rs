//! Forward-mode differentiation over scalar expression trees.
//!
//! Chart Jacobians are computed from [`eval_dual`], which seeds every input
//! direction at once and so yields a full gradient per pass. [`eval_seeded`]
//! runs a single direction when only one partial is wanted.

mod dual;
mod expr;
mod parse;

pub use dual::Dual;
pub use expr::{eval_dual, eval_scalar, eval_seeded, DomainKind, ScalarError, ScalarExpr};
pub use parse::{parse_scalar, ScalarParseError};
