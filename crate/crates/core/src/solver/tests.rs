use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::*;
use crate::geometry::{extended_alpha, BundleChart};
use crate::hdw::{derive_extended, derive_restricted, GaugeChoice, HamiltonianModel, HdwField, Provenance};
use crate::symbolic::{CoordId, Expr};

fn var(c: CoordId) -> Expr {
    Expr::var(c)
}

fn model(m: usize, h: Expr) -> HamiltonianModel {
    HamiltonianModel::new(BundleChart::new(m, 1).unwrap(), h, Provenance::UserGiven).unwrap()
}

fn oscillator_h() -> Expr {
    (var(CoordId::p(1, 1)).powi(2) + var(CoordId::y(1)).powi(2)) / Expr::int(2)
}

fn init(q: f64, p: f64, pe: Option<f64>) -> BTreeMap<CoordId, f64> {
    let mut m = BTreeMap::new();
    m.insert(CoordId::y(1), q);
    m.insert(CoordId::p(1, 1), p);
    if let Some(v) = pe {
        m.insert(CoordId::pe(), v);
    }
    m
}

fn final_state(grid: &SectionGrid) -> (f64, f64) {
    let k = grid.spec.time().steps;
    (
        grid.value(CoordId::y(1), k, 0).unwrap(),
        grid.value(CoordId::p(1, 1), k, 0).unwrap(),
    )
}

#[test]
fn oscillator_matches_analytic_solution() {
    let x = derive_restricted(&model(1, oscillator_h()), &GaugeChoice::equal_split()).unwrap();
    let span = TimeSpan::with_max_step(0.0, 10.0, 1e-3).unwrap();
    assert_eq!(span.steps, 10_000);
    let grid = solve_ode(&x, &init(1.0, 0.0, None), span).unwrap();
    let (q, p) = final_state(&grid);
    assert!((q - 10f64.cos()).abs() < 1e-6);
    assert!((p + 10f64.sin()).abs() < 1e-6);
}

#[test]
fn zero_hamiltonian_is_stationary() {
    let x = derive_extended(&model(1, Expr::zero()), &GaugeChoice::equal_split()).unwrap();
    let grid = solve_ode(&x, &init(0.3, -2.0, Some(5.0)), TimeSpan::new(0.0, 1.0, 10).unwrap()).unwrap();
    for (c, v) in [(CoordId::y(1), 0.3), (CoordId::p(1, 1), -2.0), (CoordId::pe(), 5.0)] {
        assert!(grid.field(c).unwrap().iter().all(|x| *x == v));
    }
    let report = conservation_diagnostics(&grid, &var(CoordId::pe())).unwrap();
    assert!(report.drift < 1e-12);
    assert_eq!(report.series.len(), 11);
}

#[test]
fn extended_autonomous_run_keeps_pe() {
    let m = model(1, oscillator_h());
    let x = derive_extended(&m, &GaugeChoice::equal_split()).unwrap();
    let grid = solve_ode(
        &x,
        &init(1.0, 0.0, Some(-0.5)),
        TimeSpan::new(0.0, 10.0, 10_000).unwrap(),
    )
    .unwrap();
    let pe = grid.field(CoordId::pe()).unwrap();
    assert!(pe.iter().all(|v| (v + 0.5).abs() < 1e-9));
    let (big_h, _) = extended_alpha(m.chart(), m.h()).unwrap();
    let report = conservation_diagnostics(&grid, &big_h).unwrap();
    assert!(report.drift < 1e-9, "{}", report.drift);
    assert!(report.energy_residual.is_none());
}

#[test]
fn time_dependent_energy_identity() {
    let (p, q, t) = (var(CoordId::p(1, 1)), var(CoordId::y(1)), var(CoordId::x(1)));
    let h = p.powi(2) / Expr::int(2) + q.powi(2) / Expr::int(2) * (Expr::one() + t / Expr::int(10));
    let m = model(1, h);
    let x = derive_extended(&m, &GaugeChoice::equal_split()).unwrap();
    let grid = solve_ode(
        &x,
        &init(1.0, 0.0, Some(-0.5)),
        TimeSpan::new(0.0, 10.0, 10_000).unwrap(),
    )
    .unwrap();
    let (big_h, _) = extended_alpha(m.chart(), m.h()).unwrap();
    let report = conservation_diagnostics(&grid, &big_h).unwrap();
    assert!(report.drift < 1e-7);
    assert!(report.energy_residual.unwrap() < 1e-6);
    let pe = grid.field(CoordId::pe()).unwrap();
    assert!((pe[pe.len() - 1] - pe[0]).abs() > 1e-3, "pe should drift");
}

#[test]
fn projection_matches_restricted_run() {
    let m = model(1, oscillator_h());
    let span = TimeSpan::new(0.0, 10.0, 1000).unwrap();
    let ext = solve_ode(
        &derive_extended(&m, &GaugeChoice::equal_split()).unwrap(),
        &init(1.0, 0.0, Some(0.0)),
        span,
    )
    .unwrap();
    let res = solve_ode(
        &derive_restricted(&m, &GaugeChoice::equal_split()).unwrap(),
        &init(1.0, 0.0, None),
        span,
    )
    .unwrap();
    let projected = project_extended(&ext).unwrap();
    assert_eq!(projected.fields.len(), ext.fields.len() - 1);
    assert_eq!(projected.field(CoordId::y(1)), ext.field(CoordId::y(1)));
    assert!(max_discrepancy(&projected, &res).unwrap() < 1e-9);
    assert_eq!(project_extended(&res), Err(SolverError::MissingExtended));
}

#[test]
fn rk4_is_fourth_order() {
    let x = derive_restricted(&model(1, oscillator_h()), &GaugeChoice::equal_split()).unwrap();
    let err = |steps| {
        let (q, p) =
            final_state(&solve_ode(&x, &init(1.0, 0.0, None), TimeSpan::new(0.0, 10.0, steps).unwrap()).unwrap());
        ((q - 10f64.cos()).powi(2) + (p + 10f64.sin()).powi(2)).sqrt()
    };
    let ratio = err(100) / err(200);
    assert!((14.0..=18.0).contains(&ratio), "{ratio}");
}

#[test]
fn missing_init_and_wrong_dimension() {
    let x = derive_extended(&model(1, oscillator_h()), &GaugeChoice::equal_split()).unwrap();
    let span = TimeSpan::new(0.0, 1.0, 10).unwrap();
    assert_eq!(
        solve_ode(&x, &init(1.0, 0.0, None), span),
        Err(SolverError::MissingInit(CoordId::pe()))
    );
    let wave = derive_restricted(&model(2, Expr::zero()), &GaugeChoice::equal_split()).unwrap();
    assert!(matches!(
        solve_ode(&wave, &BTreeMap::new(), span),
        Err(SolverError::WrongBaseDimension { .. })
    ));
}

#[test]
fn domain_error_aborts_with_step() {
    let (q, p) = (var(CoordId::y(1)), var(CoordId::p(1, 1)));
    // q' = log q, undefined at the initial point.
    let h = p * q.log();
    let x = derive_restricted(&model(1, h), &GaugeChoice::equal_split()).unwrap();
    let out = solve_ode(&x, &init(-0.5, 0.0, None), TimeSpan::new(0.0, 1.0, 10).unwrap());
    assert!(matches!(out, Err(SolverError::Aborted { last_valid_step: 0, .. })));
}

fn wave_field(extra: Expr) -> HdwField {
    let (pt, px) = (var(CoordId::p(1, 1)), var(CoordId::p(1, 2)));
    let h = (pt.powi(2) - px.powi(2)) / Expr::int(2) + extra;
    derive_restricted(&model(2, h), &GaugeChoice::equal_split()).unwrap()
}

#[test]
fn periodic_stencil_is_fourth_order() {
    let err = |n: usize| {
        let dx = 2.0 * PI / n as f64;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 * dx).sin()).collect();
        let mut d = vec![0.0; n];
        periodic_derivative(&u, dx, &mut d);
        (0..n).map(|i| (d[i] - (i as f64 * dx).cos()).abs()).fold(0.0, f64::max)
    };
    let ratio = err(32) / err(64);
    assert!((14.0..=18.0).contains(&ratio), "{ratio}");
}

#[test]
fn standing_wave() {
    let axis = PeriodicAxis::new(0.0, 2.0 * PI, 200).unwrap();
    let span = TimeSpan::new(0.0, 2.0 * PI, 200).unwrap();
    let y0: Vec<f64> = (0..200).map(|i| axis.x(i).sin()).collect();
    let x = wave_field(Expr::zero());
    let grid = solve_field_1p1(&x, &y0, &vec![0.0; 200], span, axis).unwrap();
    assert!(grid.meta.warnings.is_empty());
    let mut worst: f64 = 0.0;
    for k in 0..=span.steps {
        let t = span.time(k);
        for (i, y) in grid.slice(CoordId::y(1), k).unwrap().iter().enumerate() {
            worst = worst.max((y - t.cos() * axis.x(i).sin()).abs());
        }
    }
    assert!(worst < 1e-3, "{worst}");
    let report = field_energy_diagnostics(&grid, x.hamiltonian()).unwrap();
    assert!((report.series[0] - PI / 2.0).abs() < 1e-6);
    assert!(report.relative_drift < 1e-3);
}

#[test]
fn klein_gordon_dispersion() {
    let y = var(CoordId::y(1));
    let x = wave_field(y.powi(2) / Expr::int(2));
    let axis = PeriodicAxis::new(0.0, 2.0 * PI, 64).unwrap();
    let k = 2.0;
    let t1 = 1.0;
    let span = TimeSpan::with_max_step(0.0, t1, 0.5 * axis.dx()).unwrap();
    let y0: Vec<f64> = (0..64).map(|i| (k * axis.x(i)).cos()).collect();
    let grid = solve_field_1p1(&x, &y0, &vec![0.0; 64], span, axis).unwrap();
    let ratio = grid.value(CoordId::y(1), span.steps, 0).unwrap() / y0[0];
    let omega = ratio.acos() / t1;
    assert!((omega * omega - (k * k + 1.0)).abs() < 1e-3, "{omega}");
}

#[test]
fn zero_initial_data_stays_zero() {
    let axis = PeriodicAxis::new(0.0, 1.0, 16).unwrap();
    let span = TimeSpan::new(0.0, 1.0, 40).unwrap();
    let grid = solve_field_1p1(&wave_field(Expr::zero()), &[0.0; 16], &[0.0; 16], span, axis).unwrap();
    assert!(grid.fields.values().all(|v| v.iter().all(|x| *x == 0.0)));
    assert_eq!(grid.field(CoordId::y(1)).unwrap().len(), 41 * 16);
}

#[test]
fn cfl_warning_and_unsupported_forms() {
    let axis = PeriodicAxis::new(0.0, 1.0, 16).unwrap();
    let span = TimeSpan::new(0.0, 1.0, 4).unwrap();
    let grid = solve_field_1p1(&wave_field(Expr::zero()), &[0.0; 16], &[0.0; 16], span, axis).unwrap();
    assert_eq!(grid.meta.warnings.len(), 1);

    let (pt, px) = (var(CoordId::p(1, 1)), var(CoordId::p(1, 2)));
    let coupled = wave_field(&pt * &px);
    let err = solve_field_1p1(&coupled, &[0.0; 16], &[0.0; 16], span, axis).unwrap_err();
    assert!(err.to_string().contains("d(dh/dp1_1)/dp1_2"), "{err}");
    let quartic = wave_field(px.powi(4));
    let err = solve_field_1p1(&quartic, &[0.0; 16], &[0.0; 16], span, axis).unwrap_err();
    assert!(err.to_string().contains("dp1_2^2"), "{err}");
}

#[test]
fn series_derivative_is_exact_on_quartics() {
    let dt = 0.1;
    let u: Vec<f64> = (0..12).map(|k| (k as f64 * dt).powi(4)).collect();
    for (k, d) in series_derivative(&u, dt).into_iter().enumerate() {
        assert!((d - 4.0 * (k as f64 * dt).powi(3)).abs() < 1e-10, "k={k}");
    }
}
