use std::collections::BTreeMap;

use crate::symbolic::{simplify, CoordId, Expr};

use super::chart::{Bundle, BundleChart};
use super::form::{CoordForm, VectorField};
use super::GeometryError;

/// Locally decomposable m-vector field `f · X₁ ∧ … ∧ X_m` with
/// `X_ν = ∂/∂x^ν + (vertical part)`.
///
/// The overall scale `f` is kept separate from the normalized factors; a
/// field with `f = 1` satisfies `i(X)(d^m x) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordMultiVector {
    chart: BundleChart,
    bundle: Bundle,
    scale: Expr,
    components: Vec<VectorField>,
}

impl CoordMultiVector {
    /// Build `X_ν = ∂/∂x^ν + Σ vertical[ν][c] ∂/∂c`. Entries keyed by base
    /// coordinates are rejected so that the normalization invariant holds.
    pub fn normalized(
        chart: BundleChart,
        bundle: Bundle,
        vertical: Vec<BTreeMap<CoordId, Expr>>,
    ) -> Result<Self, GeometryError> {
        if vertical.len() != chart.m() {
            return Err(GeometryError::ComponentCount {
                expected: chart.m(),
                got: vertical.len(),
            });
        }
        let mut components = Vec::with_capacity(chart.m());
        for (i, vert) in vertical.into_iter().enumerate() {
            let mut comps = BTreeMap::new();
            comps.insert(CoordId::x(i + 1), Expr::one());
            for (c, e) in vert {
                if matches!(c, CoordId::Base(_)) {
                    return Err(GeometryError::NotVertical(c));
                }
                chart.check_coord(c, bundle)?;
                chart.check_expr(&e, bundle)?;
                comps.insert(c, e);
            }
            components.push(VectorField::new(chart, bundle, comps));
        }
        Ok(CoordMultiVector {
            chart,
            bundle,
            scale: Expr::one(),
            components,
        })
    }

    /// `f · self`.
    pub fn scaled(&self, f: &Expr) -> Self {
        CoordMultiVector {
            scale: simplify(&(f * &self.scale)),
            ..self.clone()
        }
    }

    pub fn chart(&self) -> BundleChart {
        self.chart
    }

    pub fn bundle(&self) -> Bundle {
        self.bundle
    }

    pub fn scale(&self) -> &Expr {
        &self.scale
    }

    /// The normalized factor `X_ν` (1-based).
    pub fn factor(&self, nu: usize) -> &VectorField {
        &self.components[nu - 1]
    }

    pub fn factors(&self) -> &[VectorField] {
        &self.components
    }

    /// `i(f X₁∧…∧X_m) F = f · i(X_m)…i(X₁) F`; `X₁` is contracted first.
    pub fn contract(&self, form: &CoordForm) -> Result<CoordForm, GeometryError> {
        if form.chart() != self.chart || form.bundle() != self.bundle {
            return Err(GeometryError::ChartMismatch {
                left: format!("multivector on {}", self.bundle),
                right: format!("form on {}", form.bundle()),
            });
        }
        let m = self.components.len();
        if form.degree() < m {
            return Err(GeometryError::DegreeTooSmall {
                degree: form.degree(),
                needed: m,
            });
        }
        let mut acc = form.clone();
        for x in &self.components {
            acc = acc.interior(x)?;
        }
        Ok(if self.scale.is_literal_one() {
            acc
        } else {
            acc.scale(&self.scale)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::canonical::volume_form;

    #[test]
    fn normalized_field_is_transverse() {
        for m in 1..=3 {
            let chart = BundleChart::new(m, 1).unwrap();
            let mut vertical = vec![BTreeMap::new(); m];
            vertical[0].insert(CoordId::y(1), Expr::var(CoordId::p(1, 1)));
            let x = CoordMultiVector::normalized(chart, Bundle::Extended, vertical).unwrap();
            let vol = volume_form(chart, Bundle::Extended);
            let r = x.contract(&vol).unwrap();
            assert_eq!(r.coefficient(&[]), Expr::one(), "m={m}");
            let f = Expr::var(CoordId::y(1));
            let r = x.scaled(&f).contract(&vol).unwrap();
            assert_eq!(r.coefficient(&[]), f);
        }
    }

    #[test]
    fn rejects_base_components_and_wrong_counts() {
        let chart = BundleChart::new(2, 1).unwrap();
        let mut bad = vec![BTreeMap::new(); 2];
        bad[1].insert(CoordId::x(1), Expr::one());
        assert!(matches!(
            CoordMultiVector::normalized(chart, Bundle::Restricted, bad),
            Err(GeometryError::NotVertical(_))
        ));
        assert!(matches!(
            CoordMultiVector::normalized(chart, Bundle::Restricted, vec![BTreeMap::new()]),
            Err(GeometryError::ComponentCount { .. })
        ));
    }

    #[test]
    fn degree_too_small() {
        let chart = BundleChart::new(2, 1).unwrap();
        let x = CoordMultiVector::normalized(chart, Bundle::Restricted, vec![BTreeMap::new(); 2]).unwrap();
        let one_form = CoordForm::differential(chart, Bundle::Restricted, CoordId::x(1));
        assert!(matches!(
            x.contract(&one_form),
            Err(GeometryError::DegreeTooSmall { degree: 1, needed: 2 })
        ));
    }
}
