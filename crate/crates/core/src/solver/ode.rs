use std::collections::BTreeMap;

use crate::hdw::HdwField;
use crate::symbolic::{CompiledExpr, CoordId};

use super::grid::{GridMeta, GridSpec, SectionGrid, TimeSpan};
use super::SolverError;

/// Classic RK4 for the m = 1 system `dz/dt = X(t, z)` given by the vertical
/// components of the field's single factor.
pub fn solve_ode(x: &HdwField, init: &BTreeMap<CoordId, f64>, span: TimeSpan) -> Result<SectionGrid, SolverError> {
    let chart = x.chart();
    if chart.m() != 1 {
        return Err(SolverError::WrongBaseDimension {
            m: chart.m(),
            supported: 1,
        });
    }
    let bundle = x.kind().bundle();
    let state: Vec<CoordId> = chart
        .coords(bundle)
        .into_iter()
        .filter(|c| !matches!(c, CoordId::Base(_)))
        .collect();
    let mut slots = vec![CoordId::x(1)];
    slots.extend(&state);
    let factor = x.multivector().factor(1);
    let rhs: Vec<CompiledExpr> = state
        .iter()
        .map(|c| CompiledExpr::compile(&factor.component(*c), &slots))
        .collect::<Result<_, _>>()?;
    let mut z: Vec<f64> = state
        .iter()
        .map(|c| init.get(c).copied().ok_or(SolverError::MissingInit(*c)))
        .collect::<Result<_, _>>()?;

    let dim = state.len();
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(span.steps + 1); dim];
    for (s, v) in series.iter_mut().zip(&z) {
        s.push(*v);
    }
    let mut args = vec![0.0; dim + 1];
    let mut eval = |t: f64, z: &[f64], out: &mut [f64], step: usize| -> Result<(), SolverError> {
        args[0] = t;
        args[1..].copy_from_slice(z);
        for (o, f) in out.iter_mut().zip(&rhs) {
            *o = f.eval(&args).map_err(|e| SolverError::Aborted {
                last_valid_step: step,
                reason: e.to_string(),
            })?;
        }
        Ok(())
    };

    let dt = span.dt();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    for step in 0..span.steps {
        let t = span.time(step);
        eval(t, &z, &mut k1, step)?;
        for i in 0..dim {
            tmp[i] = z[i] + 0.5 * dt * k1[i];
        }
        eval(t + 0.5 * dt, &tmp, &mut k2, step)?;
        for i in 0..dim {
            tmp[i] = z[i] + 0.5 * dt * k2[i];
        }
        eval(t + 0.5 * dt, &tmp, &mut k3, step)?;
        for i in 0..dim {
            tmp[i] = z[i] + dt * k3[i];
        }
        eval(t + dt, &tmp, &mut k4, step)?;
        for i in 0..dim {
            z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::Aborted {
                last_valid_step: step,
                reason: format!("`{}` became non-finite", state[i]),
            });
        }
        for (s, v) in series.iter_mut().zip(&z) {
            s.push(*v);
        }
    }

    Ok(SectionGrid {
        spec: GridSpec::Line(span),
        fields: state.into_iter().zip(series).collect(),
        meta: GridMeta {
            kind: x.kind(),
            scheme: "rk4".into(),
            hamiltonian: x.hamiltonian().to_string(),
            gauge: x.gauge().mode().label().into(),
            split: None,
            warnings: Vec::new(),
        },
    })
}
