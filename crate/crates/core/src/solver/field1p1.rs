use std::collections::BTreeMap;

use crate::hdw::{verify_zero, HdwField};
use crate::symbolic::{is_zero, CompiledExpr, CoordId, Expr};

use super::grid::{GridMeta, GridSpec, PeriodicAxis, SectionGrid, TimeSpan};
use super::SolverError;

/// Slot layout of every compiled expression in the 1+1 scheme.
fn slots() -> [CoordId; 5] {
    [
        CoordId::x(1),
        CoordId::x(2),
        CoordId::y(1),
        CoordId::p(1, 1),
        CoordId::p(1, 2),
    ]
}

/// The evolution split of an m = 2, n = 1 field with `x¹` as time:
/// `∂y/∂t = rate`, `∂p^t/∂t = trace − ∂p^x/∂x`, and the spatial momentum
/// recovered from `∂y/∂x = slope · p^x + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionSplit {
    pub rate: Expr,
    pub trace: Expr,
    pub slope: Expr,
    pub offset: Expr,
}

impl EvolutionSplit {
    pub fn describe(&self) -> String {
        format!(
            "time=x1, space=x2 (periodic); dy/dt = {}; dp1_1/dt = {} - d(p1_2)/dx; p1_2 from dy/dx = ({})*p1_2 + {}",
            self.rate, self.trace, self.slope, self.offset
        )
    }
}

/// Check that the field admits the evolution split and extract it. The error
/// names the first symbolic test that fails.
pub fn evolution_split(x: &HdwField) -> Result<EvolutionSplit, SolverError> {
    let chart = x.chart();
    if chart.m() != 2 || chart.n() != 1 {
        return Err(SolverError::UnsupportedForm(format!(
            "the 1+1 scheme needs m=2, n=1 (got m={}, n={})",
            chart.m(),
            chart.n()
        )));
    }
    let (pt, px) = (CoordId::p(1, 1), CoordId::p(1, 2));
    let rate = x.fiber()[&(1, 1)].clone();
    let spatial = x.fiber()[&(1, 2)].clone();
    let fail = |test: &str| {
        Err(SolverError::UnsupportedForm(format!(
            "not of evolution form: {test} fails"
        )))
    };
    if !verify_zero(&[rate.diff(px)], 0).holds {
        return fail("d(dh/dp1_1)/dp1_2 = 0");
    }
    if !verify_zero(&[spatial.diff(pt)], 0).holds {
        return fail("d(dh/dp1_2)/dp1_1 = 0");
    }
    let slope = spatial.diff(px);
    if !verify_zero(&[slope.diff(px)], 0).holds {
        return fail("d2(dh/dp1_2)/dp1_2^2 = 0");
    }
    if is_zero(&slope) {
        return fail("d(dh/dp1_2)/dp1_2 != 0");
    }
    let offset = spatial.substitute_one(px, &Expr::zero());
    let trace = Expr::sum((1..=2).map(|nu| x.momentum()[&(1, nu, nu)].clone()).collect());
    Ok(EvolutionSplit {
        rate,
        trace: crate::symbolic::simplify(&trace),
        slope,
        offset: crate::symbolic::simplify(&offset),
    })
}

/// Fourth-order centered first derivative with periodic wrap.
pub fn periodic_derivative(u: &[f64], dx: f64, out: &mut [f64]) {
    let n = u.len();
    for i in 0..n {
        let at = |k: isize| u[(i as isize + k).rem_euclid(n as isize) as usize];
        out[i] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * dx);
    }
}

struct Compiled {
    rate: CompiledExpr,
    trace: CompiledExpr,
    slope: CompiledExpr,
    offset: CompiledExpr,
}

struct Workspace {
    yx: Vec<f64>,
    px: Vec<f64>,
    pxx: Vec<f64>,
}

impl Compiled {
    /// Recover `p^x` on the grid from `y` and `p^t`.
    fn spatial_momentum(
        &self,
        t: f64,
        axis: &PeriodicAxis,
        y: &[f64],
        pt: &[f64],
        ws: &mut Workspace,
    ) -> Result<(), String> {
        periodic_derivative(y, axis.dx(), &mut ws.yx);
        for i in 0..y.len() {
            let args = [t, axis.x(i), y[i], pt[i], 0.0];
            let a = self.slope.eval(&args).map_err(|e| e.to_string())?;
            if a == 0.0 {
                return Err(format!("spatial relation is singular at x={}", axis.x(i)));
            }
            let b = self.offset.eval(&args).map_err(|e| e.to_string())?;
            ws.px[i] = (ws.yx[i] - b) / a;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn rates(
        &self,
        t: f64,
        axis: &PeriodicAxis,
        y: &[f64],
        pt: &[f64],
        dy: &mut [f64],
        dpt: &mut [f64],
        ws: &mut Workspace,
    ) -> Result<(), String> {
        self.spatial_momentum(t, axis, y, pt, ws)?;
        periodic_derivative(&ws.px, axis.dx(), &mut ws.pxx);
        for i in 0..y.len() {
            let args = [t, axis.x(i), y[i], pt[i], ws.px[i]];
            dy[i] = self.rate.eval(&args).map_err(|e| e.to_string())?;
            dpt[i] = self.trace.eval(&args).map_err(|e| e.to_string())? - ws.pxx[i];
        }
        Ok(())
    }
}

/// Method-of-lines RK4 for a 1+1 field in evolution form on a periodic grid.
pub fn solve_field_1p1(
    x: &HdwField,
    init_y: &[f64],
    init_pt: &[f64],
    span: TimeSpan,
    axis: PeriodicAxis,
) -> Result<SectionGrid, SolverError> {
    let split = evolution_split(x)?;
    let np = axis.points;
    if init_y.len() != np || init_pt.len() != np {
        return Err(SolverError::InvalidGrid(format!(
            "initial arrays have {} and {} values; the grid has {np} points",
            init_y.len(),
            init_pt.len()
        )));
    }
    let slots = slots();
    let compiled = Compiled {
        rate: CompiledExpr::compile(&split.rate, &slots)?,
        trace: CompiledExpr::compile(&split.trace, &slots)?,
        slope: CompiledExpr::compile(&split.slope, &slots)?,
        offset: CompiledExpr::compile(&split.offset, &slots)?,
    };
    let mut warnings = Vec::new();
    let (dt, dx) = (span.dt(), axis.dx());
    if dt > dx {
        warnings.push(format!("CFL heuristic violated: dt={dt:.6e} > dx={dx:.6e}"));
    }

    let mut ws = Workspace {
        yx: vec![0.0; np],
        px: vec![0.0; np],
        pxx: vec![0.0; np],
    };
    let levels = span.steps + 1;
    let mut out_y = Vec::with_capacity(levels * np);
    let mut out_pt = Vec::with_capacity(levels * np);
    let mut out_px = Vec::with_capacity(levels * np);
    let abort = |step: usize| {
        move |reason: String| SolverError::Aborted {
            last_valid_step: step,
            reason,
        }
    };

    let mut y = init_y.to_vec();
    let mut pt = init_pt.to_vec();
    compiled
        .spatial_momentum(span.t0, &axis, &y, &pt, &mut ws)
        .map_err(abort(0))?;
    out_y.extend_from_slice(&y);
    out_pt.extend_from_slice(&pt);
    out_px.extend_from_slice(&ws.px);

    let zeros = || vec![0.0; np];
    let (mut k1y, mut k2y, mut k3y, mut k4y) = (zeros(), zeros(), zeros(), zeros());
    let (mut k1p, mut k2p, mut k3p, mut k4p) = (zeros(), zeros(), zeros(), zeros());
    let (mut ty, mut tp) = (zeros(), zeros());
    for step in 0..span.steps {
        let t = span.time(step);
        let err = abort(step);
        compiled
            .rates(t, &axis, &y, &pt, &mut k1y, &mut k1p, &mut ws)
            .map_err(err)?;
        for i in 0..np {
            ty[i] = y[i] + 0.5 * dt * k1y[i];
            tp[i] = pt[i] + 0.5 * dt * k1p[i];
        }
        compiled
            .rates(t + 0.5 * dt, &axis, &ty, &tp, &mut k2y, &mut k2p, &mut ws)
            .map_err(err)?;
        for i in 0..np {
            ty[i] = y[i] + 0.5 * dt * k2y[i];
            tp[i] = pt[i] + 0.5 * dt * k2p[i];
        }
        compiled
            .rates(t + 0.5 * dt, &axis, &ty, &tp, &mut k3y, &mut k3p, &mut ws)
            .map_err(err)?;
        for i in 0..np {
            ty[i] = y[i] + dt * k3y[i];
            tp[i] = pt[i] + dt * k3p[i];
        }
        compiled
            .rates(t + dt, &axis, &ty, &tp, &mut k4y, &mut k4p, &mut ws)
            .map_err(err)?;
        for i in 0..np {
            y[i] += dt / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
            pt[i] += dt / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
        }
        if y.iter().chain(&pt).any(|v| !v.is_finite()) {
            return Err(SolverError::Aborted {
                last_valid_step: step,
                reason: "solution became non-finite".into(),
            });
        }
        compiled
            .spatial_momentum(span.time(step + 1), &axis, &y, &pt, &mut ws)
            .map_err(abort(step))?;
        out_y.extend_from_slice(&y);
        out_pt.extend_from_slice(&pt);
        out_px.extend_from_slice(&ws.px);
    }

    let mut fields = BTreeMap::new();
    fields.insert(CoordId::y(1), out_y);
    fields.insert(CoordId::p(1, 1), out_pt);
    fields.insert(CoordId::p(1, 2), out_px);
    Ok(SectionGrid {
        spec: GridSpec::Plane(span, axis),
        fields,
        meta: GridMeta {
            kind: x.kind(),
            scheme: "rk4 method of lines, 4th-order periodic centered differences".into(),
            hamiltonian: x.hamiltonian().to_string(),
            gauge: x.gauge().mode().label().into(),
            split: Some(split.describe()),
            warnings,
        },
    })
}
