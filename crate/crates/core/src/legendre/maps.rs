use std::collections::{BTreeMap, HashMap};

use crate::geometry::{Bundle, BundleChart};
use crate::hdw::{verify_zero, HamiltonianModel, Provenance};
use crate::symbolic::{constant_value, simplify, CoordId, Expr, Number};

use super::LegendreError;

/// A Lagrangian function on the first jet bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianModel {
    chart: BundleChart,
    lag: Expr,
}

impl LagrangianModel {
    pub fn new(chart: BundleChart, lag: Expr) -> Result<Self, LegendreError> {
        for c in lag.free_vars() {
            if !chart.contains(c, Bundle::Jet) {
                return Err(LegendreError::InvalidLagrangian(c));
            }
        }
        Ok(LagrangianModel {
            chart,
            lag: simplify(&lag),
        })
    }

    pub fn chart(&self) -> BundleChart {
        self.chart
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.lag
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularity {
    /// Constant nonsingular Hessian; the momentum map inverts exactly.
    HyperRegularClosedForm,
    /// Hessian determinant is a nonzero non-constant function.
    RegularLocal,
    /// Hessian determinant vanishes identically.
    Degenerate,
}

impl Regularity {
    pub fn label(self) -> &'static str {
        match self {
            Regularity::HyperRegularClosedForm => "hyper-regular-closed-form",
            Regularity::RegularLocal => "regular-local",
            Regularity::Degenerate => "degenerate",
        }
    }
}

/// Momentum maps, Hessian and (when available) the inverse and induced
/// Hamiltonian of a Lagrangian.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreResult {
    pub model: LagrangianModel,
    /// `P^ν_A = ∂£/∂v^A_ν`, keyed by `(A, ν)`.
    pub momentum: BTreeMap<(usize, usize), Expr>,
    /// `£ − v^A_ν ∂£/∂v^A_ν`.
    pub extended: Expr,
    /// Second derivatives in `velocity_coords` order.
    pub hessian: Vec<Vec<Expr>>,
    pub determinant: Expr,
    pub regularity: Regularity,
    /// `v^A_ν = V(x, y, p)` when the inverse exists in closed form.
    pub inverse: Option<BTreeMap<CoordId, Expr>>,
    pub hamiltonian: Option<Expr>,
}

/// Symbolic determinant by cofactor expansion along rows, memoized over the
/// set of remaining columns.
pub fn determinant(matrix: &[Vec<Expr>]) -> Expr {
    fn minor(matrix: &[Vec<Expr>], row: usize, cols: u32, memo: &mut HashMap<u32, Expr>) -> Expr {
        if row == matrix.len() {
            return Expr::one();
        }
        if let Some(e) = memo.get(&cols) {
            return e.clone();
        }
        let mut terms = Vec::new();
        let mut sign = 1;
        for j in 0..matrix.len() {
            if cols & (1 << j) == 0 {
                continue;
            }
            let a = &matrix[row][j];
            if !a.is_literal_zero() {
                let sub = minor(matrix, row + 1, cols & !(1 << j), memo);
                if !sub.is_literal_zero() {
                    terms.push(Expr::int(sign) * a * sub);
                }
            }
            sign = -sign;
        }
        let out = simplify(&Expr::sum(terms));
        memo.insert(cols, out.clone());
        out
    }
    assert!(matrix.len() < 32, "determinant limited to 31x31");
    let all = if matrix.is_empty() {
        0
    } else {
        (1u32 << matrix.len()) - 1
    };
    minor(matrix, 0, all, &mut HashMap::new())
}

/// Solve `A x = b` exactly for a constant matrix `A` and symbolic `b`.
pub(crate) fn solve_constant(a: &[Vec<Number>], b: &[Expr]) -> Option<Vec<Expr>> {
    let k = a.len();
    let mut a: Vec<Vec<Number>> = a.to_vec();
    let mut b: Vec<Expr> = b.to_vec();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip()?;
        for r in 0..k {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            let pivot_row = a[col].clone();
            for (entry, p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                let delta = -(&factor * p);
                *entry = &*entry + &delta;
            }
            b[r] = simplify(&(&b[r] - Expr::num(factor) * &b[col]));
        }
    }
    Some(
        (0..k)
            .map(|i| simplify(&(Expr::num(a[i][i].recip().expect("nonzero pivot")) * &b[i])))
            .collect(),
    )
}

pub fn legendre_maps(model: &LagrangianModel) -> LegendreResult {
    let chart = model.chart;
    let lag = &model.lag;
    let vs = chart.velocity_coords();
    let mut momentum = BTreeMap::new();
    let mut gradient = Vec::with_capacity(vs.len());
    for a in 1..=chart.n() {
        for nu in 1..=chart.m() {
            let g = lag.diff(CoordId::v(a, nu));
            momentum.insert((a, nu), g.clone());
            gradient.push(g);
        }
    }
    let contraction = Expr::sum(vs.iter().zip(&gradient).map(|(v, g)| Expr::var(*v) * g).collect());
    let extended = simplify(&(lag - contraction));
    let hessian: Vec<Vec<Expr>> = gradient
        .iter()
        .map(|g| vs.iter().map(|v| g.diff(*v)).collect())
        .collect();
    let det = determinant(&hessian);

    let constant_hessian: Option<Vec<Vec<Number>>> = hessian
        .iter()
        .map(|row| row.iter().map(constant_value).collect())
        .collect();
    let regularity = if verify_zero(std::slice::from_ref(&det), 0).holds {
        Regularity::Degenerate
    } else if constant_hessian.is_some() && constant_value(&det).is_some() {
        Regularity::HyperRegularClosedForm
    } else {
        Regularity::RegularLocal
    };

    let mut inverse = None;
    let mut hamiltonian = None;
    if let (Regularity::HyperRegularClosedForm, Some(hc)) = (regularity, &constant_hessian) {
        // ∂£/∂v = H v + b(x, y), so v = H⁻¹ (p − b).
        let at_rest: BTreeMap<CoordId, Expr> = vs.iter().map(|v| (*v, Expr::zero())).collect();
        let rhs: Vec<Expr> = (1..=chart.n())
            .flat_map(|a| (1..=chart.m()).map(move |nu| (a, nu)))
            .zip(&gradient)
            .map(|((a, nu), g)| Expr::var(CoordId::p(a, nu)) - g.substitute(&at_rest))
            .collect();
        if let Some(sol) = solve_constant(hc, &rhs) {
            let map: BTreeMap<CoordId, Expr> = vs.iter().copied().zip(sol).collect();
            let pv = Expr::sum(
                vs.iter()
                    .map(|v| match v {
                        CoordId::Velocity { a, nu } => Expr::var(CoordId::p(*a as usize, *nu as usize)) * &map[v],
                        _ => unreachable!(),
                    })
                    .collect(),
            );
            hamiltonian = Some(simplify(&(pv - lag.substitute(&map))));
            inverse = Some(map);
        }
    }

    LegendreResult {
        model: model.clone(),
        momentum,
        extended,
        hessian,
        determinant: det,
        regularity,
        inverse,
        hamiltonian,
    }
}

/// The Hamiltonian induced by a hyper-regular Lagrangian.
pub fn hamiltonian_from_lagrangian(res: &LegendreResult) -> Result<HamiltonianModel, LegendreError> {
    let h = res
        .hamiltonian
        .clone()
        .ok_or(LegendreError::NoClosedForm(res.regularity))?;
    Ok(HamiltonianModel::new(res.model.chart, h, Provenance::FromLegendre)?)
}
