//! Coordinate charts for `E`, `J¹π*` and `Mπ`, and exterior calculus in the
//! canonical wedge basis.
//!
//! Sign conventions: `d^{m-1}x_ν := i(∂/∂x^ν) d^m x`, interior products
//! contract into the first slot, and an m-vector `X₁∧…∧X_m` contracts `X₁`
//! first. With these choices the m=1 extended system gives
//! `X = ∂/∂t + ∂h/∂p ∂/∂q − ∂h/∂q ∂/∂p − ∂h/∂t ∂/∂p_e`.

mod canonical;
mod chart;
mod form;
mod multivector;

use thiserror::Error;

pub use canonical::{
    build_omega, build_theta, extended_alpha, hamilton_cartan, section_pullback, volume_contraction, volume_form,
};
pub use chart::{Bundle, BundleChart, MAX_DIMENSION};
pub use form::{normalize_basis, Basis, CoordForm, VectorField};
pub use multivector::CoordMultiVector;

use crate::symbolic::{CoordId, SymbolicError};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GeometryError {
    #[error("chart mismatch: {left} vs {right}")]
    ChartMismatch { left: String, right: String },
    #[error("form degree {degree} is too small (need at least {needed})")]
    DegreeTooSmall { degree: usize, needed: usize },
    #[error("cannot add forms of degree {left} and {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("`{coord}` is not a coordinate of {expected}")]
    WrongBundle { coord: CoordId, expected: Bundle },
    #[error("expected {expected} multivector components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("`{0}` is a base direction; only vertical components may be given")]
    NotVertical(CoordId),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}
