//! Symbolic derivation, structural verification and numerical integration of
//! Hamilton-De Donder-Weyl field equations on multimomentum bundles.

pub mod geometry;
pub mod hdw;
pub mod legendre;
pub mod solver;
pub mod symbolic;
