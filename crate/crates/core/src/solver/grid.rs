use std::collections::BTreeMap;

use crate::hdw::FieldKind;
use crate::symbolic::CoordId;

use super::SolverError;

/// Uniform time discretization `t_k = t0 + k·dt`, `k = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSpan {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeSpan {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self, SolverError> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 || steps == 0 {
            return Err(SolverError::InvalidGrid(format!(
                "need t0 < t1 and steps >= 1 (got t0={t0}, t1={t1}, steps={steps})"
            )));
        }
        Ok(TimeSpan { t0, t1, steps })
    }

    /// Smallest step count whose step does not exceed `dt`.
    pub fn with_max_step(t0: f64, t1: f64, dt: f64) -> Result<Self, SolverError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::InvalidGrid(format!("dt must be positive (got {dt})")));
        }
        let steps = ((t1 - t0) / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        TimeSpan::new(t0, t1, steps)
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }
}

/// Periodic spatial grid `x_i = x0 + i·dx`, `i = 0..points`; `x1` is
/// identified with `x0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicAxis {
    pub x0: f64,
    pub x1: f64,
    pub points: usize,
}

impl PeriodicAxis {
    pub fn new(x0: f64, x1: f64, points: usize) -> Result<Self, SolverError> {
        if !(x0.is_finite() && x1.is_finite()) || x1 <= x0 || points < 5 {
            return Err(SolverError::InvalidGrid(format!(
                "need x0 < x1 and at least 5 points (got x0={x0}, x1={x1}, points={points})"
            )));
        }
        Ok(PeriodicAxis { x0, x1, points })
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / self.points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridSpec {
    /// m = 1: values at each time level.
    Line(TimeSpan),
    /// m = 2: values at each (time, space) node, stored time-major.
    Plane(TimeSpan, PeriodicAxis),
}

impl GridSpec {
    pub fn time(&self) -> TimeSpan {
        match self {
            GridSpec::Line(t) | GridSpec::Plane(t, _) => *t,
        }
    }

    /// Values stored per field.
    pub fn len(&self) -> usize {
        match self {
            GridSpec::Line(t) => t.steps + 1,
            GridSpec::Plane(t, x) => (t.steps + 1) * x.points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Run metadata carried with the arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeta {
    pub kind: FieldKind,
    pub scheme: String,
    pub hamiltonian: String,
    pub gauge: String,
    /// How the m=2 system was split into evolution and constraint parts.
    pub split: Option<String>,
    pub warnings: Vec<String>,
}

/// A discretized section: one value array per non-base coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionGrid {
    pub spec: GridSpec,
    pub fields: BTreeMap<CoordId, Vec<f64>>,
    pub meta: GridMeta,
}

impl SectionGrid {
    pub fn field(&self, c: CoordId) -> Option<&[f64]> {
        self.fields.get(&c).map(Vec::as_slice)
    }

    /// Value at time level `k` (and spatial index `i` for planar grids).
    pub fn value(&self, c: CoordId, k: usize, i: usize) -> Option<f64> {
        let idx = match self.spec {
            GridSpec::Line(_) => k,
            GridSpec::Plane(_, x) => k * x.points + i,
        };
        self.fields.get(&c)?.get(idx).copied()
    }

    /// Spatial slice at time level `k` (planar grids only).
    pub fn slice(&self, c: CoordId, k: usize) -> Option<&[f64]> {
        match self.spec {
            GridSpec::Line(_) => None,
            GridSpec::Plane(_, x) => self.fields.get(&c).map(|v| &v[k * x.points..(k + 1) * x.points]),
        }
    }

    pub fn has_extended(&self) -> bool {
        self.fields.contains_key(&CoordId::pe())
    }
}

/// Drop `pe`: the coordinate form of projecting an extended section.
pub fn project_extended(grid: &SectionGrid) -> Result<SectionGrid, SolverError> {
    if !grid.has_extended() {
        return Err(SolverError::MissingExtended);
    }
    let mut out = grid.clone();
    out.fields.remove(&CoordId::pe());
    out.meta.kind = FieldKind::Restricted;
    Ok(out)
}

/// Largest absolute difference over the fields both grids carry. Grids must
/// share the same discretization and field set.
pub fn max_discrepancy(a: &SectionGrid, b: &SectionGrid) -> Result<f64, SolverError> {
    if a.spec != b.spec {
        return Err(SolverError::InvalidGrid("grids have different discretizations".into()));
    }
    if a.fields.keys().ne(b.fields.keys()) {
        return Err(SolverError::InvalidGrid("grids carry different fields".into()));
    }
    Ok(a.fields
        .iter()
        .flat_map(|(c, va)| va.iter().zip(&b.fields[c]).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max))
}
