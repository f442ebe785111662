//! End-to-end paths through the public API: Lagrangian to Hamiltonian to
//! field equations to numerical sections.

use std::collections::BTreeMap;

use hdw_forge_core::geometry::{hamilton_cartan, Bundle, BundleChart, CoordForm, CoordMultiVector};
use hdw_forge_core::hdw::{derive_restricted, residual_restricted, GaugeChoice, HamiltonianModel, Provenance};
use hdw_forge_core::legendre::{hamiltonian_from_lagrangian, legendre_maps, legendre_round_trip, LagrangianModel};
use hdw_forge_core::solver::{solve_ode, TimeSpan};
use hdw_forge_core::symbolic::{equivalent, CoordId, Expr};
use proptest::prelude::*;

fn var(c: CoordId) -> Expr {
    Expr::var(c)
}

#[test]
fn first_factor_contracts_first() {
    let chart = BundleChart::new(2, 1).unwrap();
    let (x1, x2, y1) = (CoordId::x(1), CoordId::x(2), CoordId::y(1));
    let a = var(CoordId::p(1, 1));
    let f = CoordForm::monomial(chart, Bundle::Restricted, Expr::one(), &[x1, x2, y1]);
    let x = CoordMultiVector::normalized(
        chart,
        Bundle::Restricted,
        vec![BTreeMap::from([(y1, a.clone())]), BTreeMap::new()],
    )
    .unwrap();
    let got = x.contract(&f).unwrap();
    // dy1 - a dx1
    assert!(equivalent(&got.component(&[y1]), &Expr::one()));
    assert!(equivalent(&got.component(&[x1]), &(-a)));
    assert!(equivalent(&got.component(&[x2]), &Expr::zero()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Quadratic Lagrangians with a nonsingular constant Hessian survive the
    /// whole symbolic chain: both Legendre directions agree and the derived
    /// field solves its own equation.
    #[test]
    fn quadratic_lagrangian_chain(
        mass in 1i64..4,
        tension in 1i64..4,
        coupling in -3i64..=3,
        potential in -2i64..=2,
    ) {
        let chart = BundleChart::new(2, 1).unwrap();
        let (vt, vx, y) = (var(CoordId::v(1, 1)), var(CoordId::v(1, 2)), var(CoordId::y(1)));
        let lag = Expr::ratio(mass, 2) * vt.powi(2) - Expr::ratio(tension, 2) * vx.powi(2)
            + Expr::int(coupling) * y.clone() * vt
            + Expr::ratio(potential, 3) * y.powi(3);
        let res = legendre_maps(&LagrangianModel::new(chart, lag).unwrap());
        prop_assert!(legendre_round_trip(&res).unwrap().holds());
        let model = hamiltonian_from_lagrangian(&res).unwrap();
        let x = derive_restricted(&model, &GaugeChoice::equal_split()).unwrap();
        let (_, omega_h) = hamilton_cartan(chart, model.h()).unwrap();
        prop_assert!(residual_restricted(&x, &omega_h).unwrap().is_structurally_zero());
    }

    /// The integrated oscillator tracks the closed-form solution for any
    /// frequency and starting point.
    #[test]
    fn oscillator_tracks_closed_form(w in 0.5f64..3.0, q0 in -2.0f64..2.0, p0 in -2.0f64..2.0) {
        let chart = BundleChart::new(1, 1).unwrap();
        let (q, p) = (CoordId::y(1), CoordId::p(1, 1));
        let h = (var(p).powi(2) + Expr::float(w * w) * var(q).powi(2)) / Expr::int(2);
        let model = HamiltonianModel::new(chart, h, Provenance::UserGiven).unwrap();
        let x = derive_restricted(&model, &GaugeChoice::equal_split()).unwrap();
        let init = BTreeMap::from([(q, q0), (p, p0)]);
        let grid = solve_ode(&x, &init, TimeSpan::with_max_step(0.0, 5.0, 1e-3).unwrap()).unwrap();
        let t = 5.0;
        let q_exact = q0 * (w * t).cos() + p0 / w * (w * t).sin();
        let p_exact = -q0 * w * (w * t).sin() + p0 * (w * t).cos();
        prop_assert!((grid.field(q).unwrap().last().unwrap() - q_exact).abs() < 1e-8);
        prop_assert!((grid.field(p).unwrap().last().unwrap() - p_exact).abs() < 1e-8);
    }
}
