use std::collections::BTreeMap;

use crate::hdw::{derive_restricted, GaugeChoice, HamiltonianModel};
use crate::symbolic::{equivalent, simplify, CoordId, Expr};

use super::maps::{hamiltonian_from_lagrangian, solve_constant, LagrangianModel, LegendreResult};
use super::LegendreError;

/// Formal total derivative `D_ν f` on jet coordinates, with second-order
/// symbols `y^A_{νρ}` standing for `∂²y^A/∂x^ν∂x^ρ`.
pub fn total_derivative(f: &Expr, nu: usize, m: usize, n: usize) -> Expr {
    let mut terms = vec![f.diff(CoordId::x(nu))];
    for a in 1..=n {
        let y = CoordId::y(a);
        if f.depends_on(y) {
            terms.push(Expr::var(CoordId::v(a, nu)) * f.diff(y));
        }
        for rho in 1..=m {
            let v = CoordId::v(a, rho);
            if f.depends_on(v) {
                terms.push(Expr::var(CoordId::y2(a, nu, rho)) * f.diff(v));
            }
        }
    }
    simplify(&Expr::sum(terms))
}

/// `Σ_ν D_ν(∂£/∂v^A_ν) − ∂£/∂y^A` for each `A`.
pub fn euler_lagrange(model: &LagrangianModel) -> Vec<Expr> {
    let (m, n) = (model.chart().m(), model.chart().n());
    let lag = model.lagrangian();
    (1..=n)
        .map(|a| {
            let mut terms: Vec<Expr> = (1..=m)
                .map(|nu| total_derivative(&lag.diff(CoordId::v(a, nu)), nu, m, n))
                .collect();
            terms.push(-lag.diff(CoordId::y(a)));
            simplify(&Expr::sum(terms))
        })
        .collect()
}

/// HDW equations of the induced Hamiltonian, pulled back to jet
/// coordinates along `p = ∂£/∂v`.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrip {
    pub euler_lagrange: Vec<Expr>,
    /// `Σ_ν D_ν(P^ν_A) − (Σ_ν G^ν_{Aν})∘P` per `A`.
    pub field_equations: Vec<Expr>,
    /// `F^A_ν∘P − v^A_ν` per `(A, ν)`; identically zero when the momentum
    /// elimination is consistent.
    pub velocity_mismatch: Vec<Expr>,
}

impl RoundTrip {
    pub fn holds(&self) -> bool {
        self.euler_lagrange
            .iter()
            .zip(&self.field_equations)
            .all(|(a, b)| equivalent(a, b))
            && self.velocity_mismatch.iter().all(crate::symbolic::is_zero)
    }
}

pub fn legendre_round_trip(res: &LegendreResult) -> Result<RoundTrip, LegendreError> {
    let model = &res.model;
    let chart = model.chart();
    let (m, n) = (chart.m(), chart.n());
    let hm = hamiltonian_from_lagrangian(res)?;
    let field = derive_restricted(&hm, &GaugeChoice::equal_split())?;
    let to_jet: BTreeMap<CoordId, Expr> = res
        .momentum
        .iter()
        .map(|(&(a, nu), e)| (CoordId::p(a, nu), e.clone()))
        .collect();

    let field_equations = (1..=n)
        .map(|a| {
            let mut terms: Vec<Expr> = (1..=m)
                .map(|nu| total_derivative(&res.momentum[&(a, nu)], nu, m, n))
                .collect();
            for nu in 1..=m {
                terms.push(-field.momentum()[&(a, nu, nu)].substitute(&to_jet));
            }
            simplify(&Expr::sum(terms))
        })
        .collect();
    let velocity_mismatch = field
        .fiber()
        .iter()
        .map(|(&(a, nu), f)| simplify(&(f.substitute(&to_jet) - Expr::var(CoordId::v(a, nu)))))
        .collect();
    Ok(RoundTrip {
        euler_lagrange: euler_lagrange(model),
        field_equations,
        velocity_mismatch,
    })
}

/// Second-order equations of a Hamiltonian whose momentum Hessian is a
/// constant nonsingular matrix: solve `v = ∂h/∂p` for `p = P(x, y, v)` and
/// return `Σ_ν D_ν(P^ν_A) + (∂h/∂y^A)∘P` per `A`.
pub fn second_order_form(model: &HamiltonianModel) -> Option<Vec<Expr>> {
    let chart = model.chart();
    let (m, n) = (chart.m(), chart.n());
    let h = model.h();
    let ps = chart.momentum_coords();
    let gradient: Vec<Expr> = ps.iter().map(|p| h.diff(*p)).collect();
    let hessian: Option<Vec<Vec<crate::symbolic::Number>>> = gradient
        .iter()
        .map(|g| {
            ps.iter()
                .map(|p| crate::symbolic::constant_value(&g.diff(*p)))
                .collect()
        })
        .collect();
    let at_rest: BTreeMap<CoordId, Expr> = ps.iter().map(|p| (*p, Expr::zero())).collect();
    let rhs: Vec<Expr> = ps
        .iter()
        .zip(&gradient)
        .map(|(p, g)| match p {
            CoordId::Momentum { a, nu } => Expr::var(CoordId::v(*a as usize, *nu as usize)) - g.substitute(&at_rest),
            _ => unreachable!(),
        })
        .collect();
    let sol = solve_constant(&hessian?, &rhs)?;
    let to_jet: BTreeMap<CoordId, Expr> = ps.iter().copied().zip(sol).collect();
    Some(
        (1..=n)
            .map(|a| {
                let mut terms: Vec<Expr> = (1..=m)
                    .map(|nu| total_derivative(&to_jet[&CoordId::p(a, nu)], nu, m, n))
                    .collect();
                terms.push(h.diff(CoordId::y(a)).substitute(&to_jet));
                simplify(&Expr::sum(terms))
            })
            .collect(),
    )
}
