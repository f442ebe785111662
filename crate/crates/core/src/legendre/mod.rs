//! Lagrangian side: Legendre maps, regularity, the induced Hamiltonian, the
//! Euler-Lagrange oracle and rank diagnostics for degenerate models.

mod euler;
mod maps;
mod rank;


use thiserror::Error;

pub use euler::{euler_lagrange, legendre_round_trip, second_order_form, total_derivative, RoundTrip};
pub use maps::{determinant, hamiltonian_from_lagrangian, legendre_maps, LagrangianModel, LegendreResult, Regularity};
pub use rank::{degenerate_image, rank_diagnostics, RankSample, Submanifold};

use crate::geometry::GeometryError;
use crate::hdw::HdwError;
use crate::symbolic::{CoordId, SymbolicError};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LegendreError {
    #[error("Lagrangian may only depend on x, y and v; found `{0}`")]
    InvalidLagrangian(CoordId),
    #[error("no closed-form Hamiltonian for a {} Lagrangian; supply h directly", .0.label())]
    NoClosedForm(Regularity),
    #[error("momentum image is only built for Lagrangians affine in the velocities")]
    UnsupportedImage,
    #[error("submanifold needs at least one parameter")]
    EmptyParameterSpace,
    #[error("embedding gives no image for `{0}`")]
    MissingImage(CoordId),
    #[error("`{0}` is not a restricted-bundle coordinate")]
    ExtraImage(CoordId),
    #[error("sample has {got} parameters, expected {expected}")]
    SampleDimension { expected: usize, got: usize },
    #[error("sample {point:?} is outside the embedding domain: {reason}")]
    Sample { point: Vec<f64>, reason: String },
    #[error(transparent)]
    Hdw(#[from] HdwError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}
