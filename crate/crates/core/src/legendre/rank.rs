use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::geometry::{hamilton_cartan, volume_form, Basis, Bundle, BundleChart, CoordForm, VectorField};
use crate::symbolic::{simplify, CompiledExpr, CoordId, Expr};

use super::maps::{LegendreResult, Regularity};
use super::LegendreError;

/// A submanifold of the restricted bundle given by an embedding of a
/// parameter space, with a Hamiltonian function on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Submanifold {
    chart: BundleChart,
    dim: usize,
    embedding: BTreeMap<CoordId, Expr>,
    h: Expr,
}

impl Submanifold {
    /// Every restricted-bundle coordinate needs an image; images and `h`
    /// may only use the parameters `s1..s{dim}`.
    pub fn new(
        chart: BundleChart,
        dim: usize,
        embedding: BTreeMap<CoordId, Expr>,
        h: Expr,
    ) -> Result<Self, LegendreError> {
        if dim == 0 {
            return Err(LegendreError::EmptyParameterSpace);
        }
        let params = Bundle::Parameters(dim);
        for c in chart.coords(Bundle::Restricted) {
            let e = embedding.get(&c).ok_or(LegendreError::MissingImage(c))?;
            chart.check_expr(e, params)?;
        }
        if let Some(c) = embedding.keys().find(|c| !chart.contains(**c, Bundle::Restricted)) {
            return Err(LegendreError::ExtraImage(*c));
        }
        chart.check_expr(&h, params)?;
        Ok(Submanifold {
            chart,
            dim,
            embedding,
            h,
        })
    }

    /// The whole restricted bundle, parametrized by its own coordinates.
    pub fn identity(chart: BundleChart, h: &Expr) -> Result<Self, LegendreError> {
        let coords = chart.coords(Bundle::Restricted);
        let to_param: BTreeMap<CoordId, Expr> = coords
            .iter()
            .enumerate()
            .map(|(i, c)| (*c, Expr::var(CoordId::param(i + 1))))
            .collect();
        let h = h.substitute(&to_param);
        Submanifold::new(chart, coords.len(), to_param, h)
    }

    pub fn chart(&self) -> BundleChart {
        self.chart
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedding(&self) -> &BTreeMap<CoordId, Expr> {
        &self.embedding
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    /// The pulled-back form `Ω_{h_P}` on the parameter space.
    pub fn omega(&self) -> CoordForm {
        let params = Bundle::Parameters(self.dim);
        let (momentum_part, _) = hamilton_cartan(self.chart, &Expr::zero()).expect("zero is a valid Hamiltonian");
        let pulled = momentum_part.pullback(self.chart, params, &self.embedding);
        let vol = volume_form(self.chart, Bundle::Restricted).pullback(self.chart, params, &self.embedding);
        let theta = pulled.sub(&vol.scale(&self.h)).expect("same degree");
        theta.exterior_derivative().neg()
    }
}

/// Image of the momentum map of a Lagrangian that is affine in the
/// velocities, parametrized by `(x, y)`.
pub fn degenerate_image(res: &LegendreResult) -> Result<Submanifold, LegendreError> {
    let chart = res.model.chart();
    let velocity_free = res
        .momentum
        .values()
        .all(|e| chart.velocity_coords().iter().all(|v| !e.depends_on(*v)));
    if res.regularity != Regularity::Degenerate || !velocity_free {
        return Err(LegendreError::UnsupportedImage);
    }
    let base_fiber = chart.coords(Bundle::Configuration);
    let to_param: BTreeMap<CoordId, Expr> = base_fiber
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, Expr::var(CoordId::param(i + 1))))
        .collect();
    let mut embedding = to_param.clone();
    for (&(a, nu), e) in &res.momentum {
        embedding.insert(CoordId::p(a, nu), simplify(&e.substitute(&to_param)));
    }
    let at_rest: BTreeMap<CoordId, Expr> = chart.velocity_coords().into_iter().map(|v| (v, Expr::zero())).collect();
    // v·∂£/∂v − £ at v = 0.
    let h = simplify(&(-res.model.lagrangian().substitute(&at_rest).substitute(&to_param)));
    Submanifold::new(chart, base_fiber.len(), embedding, h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankSample {
    pub point: Vec<f64>,
    /// `dim {v : i(v)Ω_{h_P} = 0}`.
    pub full_kernel: usize,
    /// Kernel vectors that are also vertical over the base.
    pub vertical_kernel: usize,
}

fn numeric_rank(rows: &[Vec<f64>], cols: usize) -> usize {
    if rows.is_empty() || cols == 0 {
        return 0;
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let mat = DMatrix::from_row_slice(rows.len(), cols, &flat);
    let sv = mat.svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > 1e-9 * max).count()
}

/// Kernel dimensions of the 1-contraction map `v ↦ i(v)Ω_{h_P}` at each
/// sample point, via SVD with tolerance `1e-9 · σ_max`.
pub fn rank_diagnostics(sub: &Submanifold, samples: &[Vec<f64>]) -> Result<Vec<RankSample>, LegendreError> {
    let k = sub.dim;
    let params = Bundle::Parameters(k);
    let slots = sub.chart.coords(params);
    let omega = sub.omega();

    let contractions: Vec<CoordForm> = slots
        .iter()
        .map(|s| omega.interior(&VectorField::coordinate(sub.chart, params, *s)))
        .collect::<Result<_, _>>()?;
    let bases: BTreeSet<Basis> = contractions
        .iter()
        .flat_map(|f| f.terms().map(|(b, _)| b.clone()))
        .collect();
    let mut form_rows = Vec::with_capacity(bases.len());
    for b in &bases {
        let row: Vec<CompiledExpr> = contractions
            .iter()
            .map(|f| CompiledExpr::compile(&f.coefficient(b), &slots))
            .collect::<Result<_, _>>()?;
        form_rows.push(row);
    }
    let mut base_rows = Vec::with_capacity(sub.chart.m());
    for x in sub.chart.base_coords() {
        let image = &sub.embedding[&x];
        let row: Vec<CompiledExpr> = slots
            .iter()
            .map(|s| CompiledExpr::compile(&image.diff(*s), &slots))
            .collect::<Result<_, _>>()?;
        base_rows.push(row);
    }

    let images: Vec<Vec<CompiledExpr>> = vec![sub
        .embedding
        .values()
        .chain(std::iter::once(&sub.h))
        .map(|e| CompiledExpr::compile(e, &slots))
        .collect::<Result<_, _>>()?];

    let eval_rows = |rows: &[Vec<CompiledExpr>], point: &[f64]| -> Result<Vec<Vec<f64>>, LegendreError> {
        rows.iter()
            .map(|r| r.iter().map(|c| c.eval(point)).collect::<Result<Vec<f64>, _>>())
            .collect::<Result<_, _>>()
            .map_err(|e| LegendreError::Sample {
                point: point.to_vec(),
                reason: e.to_string(),
            })
    };

    samples
        .iter()
        .map(|point| {
            if point.len() != k {
                return Err(LegendreError::SampleDimension {
                    expected: k,
                    got: point.len(),
                });
            }
            eval_rows(&images, point)?;
            let form = eval_rows(&form_rows, point)?;
            let mut stacked = form.clone();
            stacked.extend(eval_rows(&base_rows, point)?);
            Ok(RankSample {
                point: point.clone(),
                full_kernel: k - numeric_rank(&form, k),
                vertical_kernel: k - numeric_rank(&stacked, k),
            })
        })
        .collect()
}
