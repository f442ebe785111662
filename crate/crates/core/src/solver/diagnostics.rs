use crate::symbolic::{CompiledExpr, CoordId, Expr};

use super::field1p1::periodic_derivative;
use super::grid::{GridSpec, SectionGrid};
use super::SolverError;

/// Conservation summary of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub scheme: String,
    pub dt: f64,
    pub steps: usize,
    /// What `series` measures.
    pub series_label: String,
    /// One entry per time level (`steps + 1`).
    pub series: Vec<f64>,
    /// `max_k |series[k] − series[0]|`.
    pub drift: f64,
    /// `drift / |series[0]|`; NaN when the initial value is exactly zero.
    pub relative_drift: f64,
    /// `drift / dt⁴`.
    pub drift_constant: f64,
    /// Max of `|dpe/dt + d(h∘ψ)/dt|` by 4th-order differences (time-dependent
    /// `h` only).
    pub energy_residual: Option<f64>,
    pub reference_error: Option<f64>,
    pub projection_discrepancy: Option<f64>,
    pub split: Option<String>,
    pub warnings: Vec<String>,
}

impl SolveReport {
    fn from_series(grid: &SectionGrid, label: &str, series: Vec<f64>) -> Self {
        let span = grid.spec.time();
        let first = series[0];
        let drift = series.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
        SolveReport {
            scheme: grid.meta.scheme.clone(),
            dt: span.dt(),
            steps: span.steps,
            series_label: label.into(),
            series,
            drift,
            relative_drift: if first == 0.0 { f64::NAN } else { drift / first.abs() },
            drift_constant: drift / span.dt().powi(4),
            energy_residual: None,
            reference_error: None,
            projection_discrepancy: None,
            split: grid.meta.split.clone(),
            warnings: grid.meta.warnings.clone(),
        }
    }
}

/// Fourth-order first derivative of a uniformly sampled series: centered in
/// the interior, one-sided five-point stencils at the ends.
pub fn series_derivative(u: &[f64], dt: f64) -> Vec<f64> {
    let n = u.len();
    if n < 5 {
        return vec![f64::NAN; n];
    }
    (0..n)
        .map(|k| {
            let d = if k >= 2 && k + 2 < n {
                -u[k + 2] + 8.0 * u[k + 1] - 8.0 * u[k - 1] + u[k - 2]
            } else if k == 0 {
                -25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]
            } else if k == 1 {
                -3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]
            } else if k == n - 2 {
                3.0 * u[n - 1] + 10.0 * u[n - 2] - 18.0 * u[n - 3] + 6.0 * u[n - 4] - u[n - 5]
            } else {
                25.0 * u[n - 1] - 48.0 * u[n - 2] + 36.0 * u[n - 3] - 16.0 * u[n - 4] + 3.0 * u[n - 5]
            };
            d / (12.0 * dt)
        })
        .collect()
}

fn state_slots(grid: &SectionGrid) -> Vec<CoordId> {
    let mut slots = vec![CoordId::x(1)];
    slots.extend(grid.fields.keys().copied());
    slots
}

fn evaluate_along(grid: &SectionGrid, e: &Expr, slots: &[CoordId]) -> Result<Vec<f64>, SolverError> {
    let compiled = CompiledExpr::compile(e, slots)?;
    let span = grid.spec.time();
    let mut args = vec![0.0; slots.len()];
    (0..=span.steps)
        .map(|k| {
            args[0] = span.time(k);
            for (j, c) in slots[1..].iter().enumerate() {
                args[j + 1] = grid.fields[c][k];
            }
            compiled.eval(&args).map_err(SolverError::from)
        })
        .collect()
}

/// Level-set diagnostics of an extended m = 1 run for `H = pe + h`.
pub fn conservation_diagnostics(grid: &SectionGrid, big_h: &Expr) -> Result<SolveReport, SolverError> {
    if !matches!(grid.spec, GridSpec::Line(_)) {
        return Err(SolverError::InvalidGrid(
            "conservation diagnostics need an m=1 run".into(),
        ));
    }
    let pe = grid.field(CoordId::pe()).ok_or(SolverError::MissingExtended)?;
    let slots = state_slots(grid);
    let series = evaluate_along(grid, big_h, &slots)?;
    let mut report = SolveReport::from_series(grid, "H", series);
    let h = crate::symbolic::simplify(&(big_h - Expr::var(CoordId::pe())));
    if h.depends_on(CoordId::x(1)) {
        let dt = grid.spec.time().dt();
        let h_series = evaluate_along(grid, &h, &slots)?;
        let dpe = series_derivative(pe, dt);
        let dh = series_derivative(&h_series, dt);
        report.energy_residual = Some(dpe.iter().zip(&dh).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max));
    }
    Ok(report)
}

/// Energy of a 1+1 run, `Σ_i (h − p^x ∂y/∂x)·dx` per time level. For the
/// wave Hamiltonian this is `½ Σ ((p^t)² + (∂y/∂x)²) dx`.
pub fn field_energy_diagnostics(grid: &SectionGrid, h: &Expr) -> Result<SolveReport, SolverError> {
    let GridSpec::Plane(span, axis) = grid.spec else {
        return Err(SolverError::InvalidGrid("field energy needs a 1+1 run".into()));
    };
    let slots = [
        CoordId::x(1),
        CoordId::x(2),
        CoordId::y(1),
        CoordId::p(1, 1),
        CoordId::p(1, 2),
    ];
    let compiled = CompiledExpr::compile(h, &slots)?;
    let np = axis.points;
    let mut yx = vec![0.0; np];
    let mut series = Vec::with_capacity(span.steps + 1);
    for k in 0..=span.steps {
        let y = grid
            .slice(CoordId::y(1), k)
            .ok_or(SolverError::MissingField(CoordId::y(1)))?;
        let pt = grid
            .slice(CoordId::p(1, 1), k)
            .ok_or(SolverError::MissingField(CoordId::p(1, 1)))?;
        let px = grid
            .slice(CoordId::p(1, 2), k)
            .ok_or(SolverError::MissingField(CoordId::p(1, 2)))?;
        periodic_derivative(y, axis.dx(), &mut yx);
        let mut total = 0.0;
        for i in 0..np {
            let density = compiled.eval(&[span.time(k), axis.x(i), y[i], pt[i], px[i]])? - px[i] * yx[i];
            total += density;
        }
        series.push(total * axis.dx());
    }
    Ok(SolveReport::from_series(grid, "field energy", series))
}
