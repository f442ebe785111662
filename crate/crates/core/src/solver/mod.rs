//! Numerical integration of derived field equations: RK4 for m = 1 and a
//! method-of-lines scheme for 1+1 fields in evolution form.

mod diagnostics;
mod field1p1;
mod grid;
mod ode;

#[cfg(test)]
mod tests;

use thiserror::Error;

pub use diagnostics::{conservation_diagnostics, field_energy_diagnostics, series_derivative, SolveReport};
pub use field1p1::{evolution_split, periodic_derivative, solve_field_1p1, EvolutionSplit};
pub use grid::{max_discrepancy, project_extended, GridMeta, GridSpec, PeriodicAxis, SectionGrid, TimeSpan};
pub use ode::solve_ode;

use crate::symbolic::{CoordId, SymbolicError};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SolverError {
    #[error("numerical solving supports m={supported} here (got m={m})")]
    WrongBaseDimension { m: usize, supported: usize },
    #[error("no initial value for `{0}`")]
    MissingInit(CoordId),
    #[error("grid has no `{0}` values")]
    MissingField(CoordId),
    #[error("run aborted after step {last_valid_step}: {reason}")]
    Aborted { last_valid_step: usize, reason: String },
    #[error("{0}")]
    UnsupportedForm(String),
    #[error("grid carries no pe values")]
    MissingExtended,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}
