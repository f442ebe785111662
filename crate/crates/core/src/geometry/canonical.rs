//! Canonical forms of the multimomentum bundles and the forms induced by a
//! Hamiltonian.

use std::collections::BTreeMap;

use crate::symbolic::{simplify, CoordId, Expr};

use super::chart::{Bundle, BundleChart};
use super::form::{CoordForm, VectorField};
use super::GeometryError;

/// `d^m x = dx¹ ∧ … ∧ dx^m`.
pub fn volume_form(chart: BundleChart, bundle: Bundle) -> CoordForm {
    CoordForm::monomial(chart, bundle, Expr::one(), &chart.base_coords())
}

/// `d^{m-1}x_ν = i(∂/∂x^ν) d^m x`.
pub fn volume_contraction(chart: BundleChart, bundle: Bundle, nu: usize) -> CoordForm {
    let e_nu = VectorField::coordinate(chart, bundle, CoordId::x(nu));
    volume_form(chart, bundle)
        .interior(&e_nu)
        .expect("volume form has degree m >= 1")
}

/// `Σ coef(A,ν) dy^A ∧ d^{m-1}x_ν` on the given bundle.
fn momentum_part(chart: BundleChart, bundle: Bundle, coef: impl Fn(usize, usize) -> Expr) -> CoordForm {
    let mut acc = CoordForm::zero(chart, bundle, chart.m());
    for a in 1..=chart.n() {
        let dy = CoordForm::differential(chart, bundle, CoordId::y(a));
        for nu in 1..=chart.m() {
            let term = dy
                .wedge(&volume_contraction(chart, bundle, nu))
                .expect("same space")
                .scale(&coef(a, nu));
            acc = acc.add(&term).expect("same degree");
        }
    }
    acc
}

/// Tautological m-form `Θ = p^ν_A dy^A ∧ d^{m-1}x_ν + p d^m x` on `Mπ`.
pub fn build_theta(chart: BundleChart) -> CoordForm {
    let bundle = Bundle::Extended;
    let p_part = momentum_part(chart, bundle, |a, nu| Expr::var(CoordId::p(a, nu)));
    let pe_part = volume_form(chart, bundle).scale(&Expr::var(CoordId::pe()));
    p_part.add(&pe_part).expect("same degree")
}

/// Multisymplectic form `Ω = -dΘ` on `Mπ`.
pub fn build_omega(chart: BundleChart) -> CoordForm {
    build_theta(chart).exterior_derivative().neg()
}

fn check_restricted(chart: BundleChart, h: &Expr) -> Result<(), GeometryError> {
    for c in h.free_vars() {
        if !chart.contains(c, Bundle::Restricted) {
            return Err(GeometryError::WrongBundle {
                coord: c,
                expected: Bundle::Restricted,
            });
        }
    }
    Ok(())
}

/// Hamilton-Cartan forms on `J¹π*`:
/// `Θ_h = p^ν_A dy^A ∧ d^{m-1}x_ν - h d^m x` and `Ω_h = -dΘ_h`.
pub fn hamilton_cartan(chart: BundleChart, h: &Expr) -> Result<(CoordForm, CoordForm), GeometryError> {
    check_restricted(chart, h)?;
    let bundle = Bundle::Restricted;
    let p_part = momentum_part(chart, bundle, |a, nu| Expr::var(CoordId::p(a, nu)));
    let h_part = volume_form(chart, bundle).scale(&-h);
    let theta_h = p_part.add(&h_part).expect("same degree");
    let omega_h = theta_h.exterior_derivative().neg();
    Ok((theta_h, omega_h))
}

/// Extended Hamiltonian `H = p + h` and `α = dH` on `Mπ`.
pub fn extended_alpha(chart: BundleChart, h: &Expr) -> Result<(Expr, CoordForm), GeometryError> {
    check_restricted(chart, h)?;
    let big_h = simplify(&(Expr::var(CoordId::pe()) + h));
    let alpha = CoordForm::scalar(chart, Bundle::Extended, big_h.clone()).exterior_derivative();
    Ok((big_h, alpha))
}

/// Pull a form on `Mπ` back to `J¹π*` along the Hamiltonian section
/// `p = -h(x, y, p^ν_A)`.
pub fn section_pullback(form: &CoordForm, h: &Expr) -> Result<CoordForm, GeometryError> {
    if form.bundle() != Bundle::Extended {
        return Err(GeometryError::WrongBundle {
            coord: CoordId::pe(),
            expected: Bundle::Extended,
        });
    }
    check_restricted(form.chart(), h)?;
    let mut map = BTreeMap::new();
    map.insert(CoordId::pe(), -h);
    Ok(form.pullback(form.chart(), Bundle::Restricted, &map))
}
