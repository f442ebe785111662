use std::collections::BTreeMap;

use crate::geometry::{volume_form, Bundle, CoordForm};
use crate::symbolic::{simplify, CoordId, Expr};

use super::field::{FieldKind, HdwField};
use super::HdwError;

fn require_kind(x: &HdwField, kind: FieldKind) -> Result<(), HdwError> {
    if x.kind() != kind {
        return Err(HdwError::KindMismatch {
            expected: kind,
            got: x.kind(),
        });
    }
    Ok(())
}

fn simplified(form: CoordForm) -> CoordForm {
    form.map_coefficients(simplify)
}

/// `i(X)Ω_h`.
pub fn residual_restricted(x: &HdwField, omega_h: &CoordForm) -> Result<CoordForm, HdwError> {
    require_kind(x, FieldKind::Restricted)?;
    Ok(simplified(x.multivector().contract(omega_h)?))
}

/// `i(X)Ω − (−1)^{m+1} α`.
pub fn residual_extended(x: &HdwField, omega: &CoordForm, alpha: &CoordForm) -> Result<CoordForm, HdwError> {
    require_kind(x, FieldKind::Extended)?;
    let m = x.chart().m();
    let sign = if m % 2 == 1 { 1 } else { -1 };
    let lhs = x.multivector().contract(omega)?;
    Ok(simplified(lhs.sub(&alpha.scale(&Expr::int(sign)))?))
}

/// `i(X)(d^m x)`; equals the multivector scale.
pub fn transversality(x: &HdwField) -> Expr {
    let mv = x.multivector();
    let vol = volume_form(mv.chart(), mv.bundle());
    let r = mv.contract(&vol).expect("volume form has degree m");
    simplify(&r.coefficient(&[]))
}

/// The `dpe` coefficient of a 1-form on the extended bundle.
pub fn mu_vertical_pairing(alpha: &CoordForm) -> Result<Expr, HdwError> {
    if alpha.degree() != 1 {
        return Err(HdwError::NotAOneForm(alpha.degree()));
    }
    if alpha.bundle() != Bundle::Extended {
        return Err(HdwError::Geometry(crate::geometry::GeometryError::WrongBundle {
            coord: CoordId::pe(),
            expected: alpha.bundle(),
        }));
    }
    Ok(simplify(&alpha.coefficient(&[CoordId::pe()])))
}

/// `[i(X_ν) dH]` for each factor of an extended field.
pub fn tangency_check(x: &HdwField, big_h: &Expr) -> Result<Vec<Expr>, HdwError> {
    require_kind(x, FieldKind::Extended)?;
    Ok(x.multivector().factors().iter().map(|f| f.apply(big_h)).collect())
}

/// Vertical components of `[X_ν, X_η]` for one pair `ν < η`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureEntry {
    pub nu: usize,
    pub eta: usize,
    pub components: BTreeMap<CoordId, Expr>,
}

impl CurvatureEntry {
    pub fn is_flat(&self) -> bool {
        self.components.values().all(crate::symbolic::is_zero)
    }
}

/// Curvature of the connection defined by the factors of `X`. Every vertical
/// coordinate is listed, zero or not. Empty for m = 1.
pub fn curvature(x: &HdwField) -> Vec<CurvatureEntry> {
    let mv = x.multivector();
    let chart = mv.chart();
    let vertical: Vec<CoordId> = chart
        .coords(mv.bundle())
        .into_iter()
        .filter(|c| !matches!(c, CoordId::Base(_)))
        .collect();
    let mut out = Vec::new();
    for nu in 1..=chart.m() {
        for eta in nu + 1..=chart.m() {
            let b = mv.factor(nu).bracket(mv.factor(eta));
            let components = vertical.iter().map(|c| (*c, b.component(*c))).collect();
            out.push(CurvatureEntry { nu, eta, components });
        }
    }
    out
}

/// `Σ_ν dx^ν ∧ i(X_ν)Ω_h − (m−1)Ω_h`.
pub fn connection_equation_check(x: &HdwField, omega_h: &CoordForm) -> Result<CoordForm, HdwError> {
    require_kind(x, FieldKind::Restricted)?;
    let mv = x.multivector();
    let chart = mv.chart();
    let mut acc = omega_h.scale(&Expr::int(1 - chart.m() as i64));
    for (i, factor) in mv.factors().iter().enumerate() {
        let dx = CoordForm::differential(chart, mv.bundle(), CoordId::x(i + 1));
        acc = acc.add(&dx.wedge(&omega_h.interior(factor)?)?)?;
    }
    Ok(simplified(acc))
}
