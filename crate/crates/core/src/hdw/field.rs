use std::collections::BTreeMap;

use crate::geometry::{Bundle, BundleChart, CoordMultiVector};
use crate::symbolic::{simplify, CoordId, Expr};

use super::gauge::GaugeChoice;
use super::HdwError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    UserGiven,
    FromLegendre,
}

/// A local Hamiltonian function on the restricted multimomentum bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianModel {
    chart: BundleChart,
    h: Expr,
    provenance: Provenance,
}

impl HamiltonianModel {
    pub fn new(chart: BundleChart, h: Expr, provenance: Provenance) -> Result<Self, HdwError> {
        for c in h.free_vars() {
            if !chart.contains(c, Bundle::Restricted) {
                return Err(HdwError::InvalidHamiltonian(c));
            }
        }
        Ok(HamiltonianModel {
            chart,
            h: simplify(&h),
            provenance,
        })
    }

    pub fn chart(&self) -> BundleChart {
        self.chart
    }

    pub fn h(&self) -> &Expr {
        &self.h
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Restricted,
    Extended,
}

impl FieldKind {
    pub fn bundle(self) -> Bundle {
        match self {
            FieldKind::Restricted => Bundle::Restricted,
            FieldKind::Extended => Bundle::Extended,
        }
    }
}

/// Coefficient tables of a normalized HDW multivector field together with
/// the assembled multivector.
///
/// `fiber[(A, ν)]` is the `∂/∂y^A` component of `X_ν`, `momentum[(A, ρ, ν)]`
/// the `∂/∂p^ρ_A` component and `energy[ν-1]` the `∂/∂pe` component (extended
/// kind only).
#[derive(Clone, Debug, PartialEq)]
pub struct HdwField {
    kind: FieldKind,
    h: Expr,
    multivector: CoordMultiVector,
    fiber: BTreeMap<(usize, usize), Expr>,
    momentum: BTreeMap<(usize, usize, usize), Expr>,
    energy: Vec<Expr>,
    gauge: GaugeChoice,
}

impl HdwField {
    /// Assemble a field from explicit coefficient tables. Missing entries are
    /// zero; `energy` is ignored for the restricted kind.
    pub fn from_components(
        kind: FieldKind,
        chart: BundleChart,
        h: Expr,
        fiber: BTreeMap<(usize, usize), Expr>,
        momentum: BTreeMap<(usize, usize, usize), Expr>,
        energy: Vec<Expr>,
        gauge: GaugeChoice,
    ) -> Result<Self, HdwError> {
        let (m, n) = (chart.m(), chart.n());
        let mut fiber_full = BTreeMap::new();
        let mut momentum_full = BTreeMap::new();
        let mut vertical = vec![BTreeMap::new(); m];
        for nu in 1..=m {
            for a in 1..=n {
                let f = simplify(&fiber.get(&(a, nu)).cloned().unwrap_or_else(Expr::zero));
                vertical[nu - 1].insert(CoordId::y(a), f.clone());
                fiber_full.insert((a, nu), f);
                for rho in 1..=m {
                    let g = simplify(&momentum.get(&(a, rho, nu)).cloned().unwrap_or_else(Expr::zero));
                    vertical[nu - 1].insert(CoordId::p(a, rho), g.clone());
                    momentum_full.insert((a, rho, nu), g);
                }
            }
        }
        let energy = match kind {
            FieldKind::Restricted => Vec::new(),
            FieldKind::Extended => {
                let e: Vec<Expr> = (0..m)
                    .map(|i| simplify(&energy.get(i).cloned().unwrap_or_else(Expr::zero)))
                    .collect();
                for (i, g) in e.iter().enumerate() {
                    vertical[i].insert(CoordId::pe(), g.clone());
                }
                e
            }
        };
        let multivector = CoordMultiVector::normalized(chart, kind.bundle(), vertical)?;
        Ok(HdwField {
            kind,
            h,
            multivector,
            fiber: fiber_full,
            momentum: momentum_full,
            energy,
            gauge,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn chart(&self) -> BundleChart {
        self.multivector.chart()
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    pub fn multivector(&self) -> &CoordMultiVector {
        &self.multivector
    }

    pub fn gauge(&self) -> &GaugeChoice {
        &self.gauge
    }

    pub fn fiber(&self) -> &BTreeMap<(usize, usize), Expr> {
        &self.fiber
    }

    pub fn momentum(&self) -> &BTreeMap<(usize, usize, usize), Expr> {
        &self.momentum
    }

    pub fn energy(&self) -> &[Expr] {
        &self.energy
    }

    /// The same field with the overall scale multiplied by `f`.
    pub fn scaled(&self, f: &Expr) -> Self {
        HdwField {
            multivector: self.multivector.scaled(f),
            ..self.clone()
        }
    }

    /// Add `delta` to the `∂/∂coord` component of `X_ν`. Used to build
    /// deliberately broken fields for checker sentinels.
    pub fn perturbed(&self, nu: usize, coord: CoordId, delta: &Expr) -> Result<Self, HdwError> {
        let mut fiber = self.fiber.clone();
        let mut momentum = self.momentum.clone();
        let mut energy = self.energy.clone();
        let slot = match coord {
            CoordId::Fiber(a) => fiber.get_mut(&(a as usize, nu)),
            CoordId::Momentum { a, nu: rho } => momentum.get_mut(&(a as usize, rho as usize, nu)),
            CoordId::Extended if self.kind == FieldKind::Extended => energy.get_mut(nu.wrapping_sub(1)),
            _ => None,
        };
        let slot = slot.ok_or(HdwError::NotAComponent { coord, nu })?;
        *slot = simplify(&(&*slot + delta));
        let out = HdwField::from_components(
            self.kind,
            self.chart(),
            self.h.clone(),
            fiber,
            momentum,
            energy,
            self.gauge.clone(),
        )?;
        Ok(out.scaled(self.multivector.scale()))
    }
}

/// Fiber coefficients keyed by `(A, nu)` and momentum coefficients keyed by
/// `(A, rho, nu)`.
type RestrictedTables = (BTreeMap<(usize, usize), Expr>, BTreeMap<(usize, usize, usize), Expr>);

fn restricted_tables(model: &HamiltonianModel, gauge: &GaugeChoice) -> Result<RestrictedTables, HdwError> {
    let chart = model.chart;
    gauge.validate(chart)?;
    let mut fiber = BTreeMap::new();
    for a in 1..=chart.n() {
        for nu in 1..=chart.m() {
            fiber.insert((a, nu), model.h.diff(CoordId::p(a, nu)));
        }
    }
    let dh_dy: Vec<Expr> = (1..=chart.n()).map(|a| model.h.diff(CoordId::y(a))).collect();
    Ok((fiber, gauge.momentum_coefficients(chart, &dh_dy)))
}

/// Normalized solution of `i(X)Ω_h = 0` on the restricted bundle.
pub fn derive_restricted(model: &HamiltonianModel, gauge: &GaugeChoice) -> Result<HdwField, HdwError> {
    let (fiber, momentum) = restricted_tables(model, gauge)?;
    HdwField::from_components(
        FieldKind::Restricted,
        model.chart,
        model.h.clone(),
        fiber,
        momentum,
        Vec::new(),
        gauge.clone(),
    )
}

/// Normalized solution of `i(X)Ω = (−1)^{m+1} dH` on the extended bundle.
///
/// `g_ν = −∂h/∂x^ν + Σ_A Σ_{η≠ν} (F^A_ν G^η_{Aη} − F^A_η G^η_{Aν})`.
pub fn derive_extended(model: &HamiltonianModel, gauge: &GaugeChoice) -> Result<HdwField, HdwError> {
    let (fiber, momentum) = restricted_tables(model, gauge)?;
    let chart = model.chart;
    let m = chart.m();
    let energy = (1..=m)
        .map(|nu| {
            let mut terms = vec![-model.h.diff(CoordId::x(nu))];
            for a in 1..=chart.n() {
                for eta in (1..=m).filter(|&eta| eta != nu) {
                    terms.push(&fiber[&(a, nu)] * &momentum[&(a, eta, eta)]);
                    terms.push(-(&fiber[&(a, eta)] * &momentum[&(a, eta, nu)]));
                }
            }
            Expr::sum(terms)
        })
        .collect();
    HdwField::from_components(
        FieldKind::Extended,
        chart,
        model.h.clone(),
        fiber,
        momentum,
        energy,
        gauge.clone(),
    )
}
