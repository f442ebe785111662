//! Hamilton-De Donder-Weyl multivector fields: derivation from a Hamiltonian
//! under an explicit gauge, and structural checks of the field equations.
//!
//! The extended field on `Mπ` has factors
//! `X_ν = ∂/∂x^ν + F^A_ν ∂/∂y^A + G^ρ_{Aν} ∂/∂p^ρ_A + g_ν ∂/∂pe`; the
//! restricted field drops the last term.

mod checks;
pub mod corpus;
mod field;
mod gauge;
mod verify;


use thiserror::Error;

pub use checks::{
    connection_equation_check, curvature, mu_vertical_pairing, residual_extended, residual_restricted, tangency_check,
    transversality, CurvatureEntry,
};
pub use field::{derive_extended, derive_restricted, FieldKind, HamiltonianModel, HdwField, Provenance};
pub use gauge::{dof_count, GaugeChoice, GaugeKey, GaugeMode};
pub use verify::{verify_form_zero, verify_zero, CheckMethod, ZeroVerdict, NUMERIC_ZERO_TOL, SAMPLE_POINTS};

use crate::geometry::GeometryError;
use crate::symbolic::CoordId;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum HdwError {
    #[error("Hamiltonian may only depend on x, y and p^nu_A; found `{0}`")]
    InvalidHamiltonian(CoordId),
    #[error("gauge table has {got} entries; a full table needs {expected}")]
    GaugeCardinality { expected: usize, got: usize },
    #[error("gauge entry `{key}` does not exist for m={m}, n={n}")]
    UnknownGaugeKey { key: String, m: usize, n: usize },
    #[error("gauge entry `{key}` depends on `{coord}`, which is not a restricted-bundle coordinate")]
    GaugeCoordinate { key: String, coord: CoordId },
    #[error("expected a {expected:?} field, got {got:?}")]
    KindMismatch { expected: FieldKind, got: FieldKind },
    #[error("expected a 1-form, got degree {0}")]
    NotAOneForm(usize),
    #[error("`{coord}` is not a vertical component of factor {nu}")]
    NotAComponent { coord: CoordId, nu: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
