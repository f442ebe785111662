//! Immutable symbolic expressions over chart coordinates.

mod coord;
mod diff;
mod eval;
mod expr;
mod normal;
mod number;
mod render;

use thiserror::Error;

pub use coord::CoordId;
pub use eval::{evaluate, fd_check, Assignment, CompiledExpr, FdCheck};
pub use expr::{rational, Expr, Func, Node};
pub use normal::{constant_value, equivalent, is_zero, simplify};
pub use number::Number;

use crate::geometry::{Bundle, BundleChart};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SymbolicError {
    #[error("no value assigned to `{0}`")]
    IncompleteAssignment(CoordId),
    #[error("domain error ({reason}) in `{node}`")]
    Domain { reason: String, node: String },
    #[error("coordinate `{coord}` does not belong to the {bundle} chart with m={m}, n={n}")]
    ChartMismatch {
        coord: CoordId,
        bundle: Bundle,
        m: usize,
        n: usize,
    },
}

/// `∂e/∂wrt`, with `wrt` and every free variable of `e` checked against the
/// given bundle chart.
pub fn differentiate(e: &Expr, wrt: CoordId, chart: &BundleChart, bundle: Bundle) -> Result<Expr, SymbolicError> {
    chart.check_coord(wrt, bundle)?;
    chart.check_expr(e, bundle)?;
    Ok(e.diff(wrt))
}
