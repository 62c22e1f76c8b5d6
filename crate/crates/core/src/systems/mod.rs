//! Built-in right-hand sides.

pub mod expr;
mod lcr;
mod linear;

pub use expr::{parse_rhs, Expr, RhsExpr};
pub use lcr::{equilibria, g_piecewise, lcr_rhs, EquilibriumSet, LcrParams, LcrSystem};
pub use linear::{linear_rhs, LinearSystem};
