use std::collections::BTreeMap;
use std::fmt;

use crate::symbolic::{is_zero, simplify, CoordId, Expr};

use super::chart::{Bundle, BundleChart};
use super::GeometryError;

/// A wedge monomial `dz^{i1} ∧ … ∧ dz^{ik}` with strictly increasing indices.
pub type Basis = Vec<CoordId>;

/// Sort a covector index list into increasing order and return the sign of
/// the permutation, or `None` when an index repeats.
pub fn normalize_basis(mut idx: Vec<CoordId>) -> Option<(Basis, i64)> {
    let mut sign = 1;
    // insertion sort; lists are short and we need the parity
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((idx, sign))
}

fn signed(coef: Expr, sign: i64) -> Expr {
    if sign < 0 {
        -coef
    } else {
        coef
    }
}

/// Sparse differential form in the canonical wedge basis of a chart.
/// Coefficients are kept simplified and zero terms are absent.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordForm {
    chart: BundleChart,
    bundle: Bundle,
    degree: usize,
    terms: BTreeMap<Basis, Expr>,
}

impl CoordForm {
    pub fn zero(chart: BundleChart, bundle: Bundle, degree: usize) -> Self {
        CoordForm {
            chart,
            bundle,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: BundleChart, bundle: Bundle, f: Expr) -> Self {
        let mut out = CoordForm::zero(chart, bundle, 0);
        out.accumulate(Vec::new(), f);
        out
    }

    /// `coef · dz^{c1} ∧ … ∧ dz^{ck}` for an arbitrary index order.
    pub fn monomial(chart: BundleChart, bundle: Bundle, coef: Expr, idx: &[CoordId]) -> Self {
        let mut out = CoordForm::zero(chart, bundle, idx.len());
        if let Some((basis, sign)) = normalize_basis(idx.to_vec()) {
            out.accumulate(basis, signed(coef, sign));
        }
        out
    }

    /// The 1-form `dc`.
    pub fn differential(chart: BundleChart, bundle: Bundle, c: CoordId) -> Self {
        CoordForm::monomial(chart, bundle, Expr::one(), &[c])
    }

    pub fn chart(&self) -> BundleChart {
        self.chart
    }

    pub fn bundle(&self) -> Bundle {
        self.bundle
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Basis, &Expr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient on a sorted basis (zero if absent).
    pub fn coefficient(&self, basis: &[CoordId]) -> Expr {
        self.terms.get(basis).cloned().unwrap_or_else(Expr::zero)
    }

    /// Coefficient on an arbitrary index order, with the permutation sign applied.
    pub fn component(&self, idx: &[CoordId]) -> Expr {
        match normalize_basis(idx.to_vec()) {
            Some((basis, sign)) => simplify(&signed(self.coefficient(&basis), sign)),
            None => Expr::zero(),
        }
    }

    fn accumulate(&mut self, basis: Basis, coef: Expr) {
        let updated = match self.terms.remove(&basis) {
            Some(old) => simplify(&(old + coef)),
            None => simplify(&coef),
        };
        if !updated.is_literal_zero() {
            self.terms.insert(basis, updated);
        }
    }

    /// Every coefficient is an exact zero (rational-function zero test).
    pub fn is_structurally_zero(&self) -> bool {
        self.terms.values().all(is_zero)
    }

    fn same_space(&self, other: &CoordForm) -> Result<(), GeometryError> {
        if self.chart != other.chart || self.bundle != other.bundle {
            return Err(GeometryError::ChartMismatch {
                left: format!("{} (m={}, n={})", self.bundle, self.chart.m(), self.chart.n()),
                right: format!("{} (m={}, n={})", other.bundle, other.chart.m(), other.chart.n()),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &CoordForm) -> Result<CoordForm, GeometryError> {
        self.same_space(other)?;
        if self.degree != other.degree {
            return Err(GeometryError::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.accumulate(b.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &CoordForm) -> Result<CoordForm, GeometryError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CoordForm {
        self.scale(&Expr::int(-1))
    }

    /// Multiply every coefficient by a function.
    pub fn scale(&self, f: &Expr) -> CoordForm {
        let mut out = CoordForm::zero(self.chart, self.bundle, self.degree);
        for (b, c) in &self.terms {
            out.accumulate(b.clone(), f * c);
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> CoordForm {
        let mut out = CoordForm::zero(self.chart, self.bundle, self.degree);
        for (b, c) in &self.terms {
            out.accumulate(b.clone(), f(c));
        }
        out
    }

    /// Graded-commutative wedge product.
    pub fn wedge(&self, other: &CoordForm) -> Result<CoordForm, GeometryError> {
        self.same_space(other)?;
        let mut out = CoordForm::zero(self.chart, self.bundle, self.degree + other.degree);
        for (b1, c1) in &self.terms {
            for (b2, c2) in &other.terms {
                let idx: Vec<CoordId> = b1.iter().chain(b2.iter()).copied().collect();
                if let Some((basis, sign)) = normalize_basis(idx) {
                    out.accumulate(basis, signed(c1 * c2, sign));
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative `d`.
    pub fn exterior_derivative(&self) -> CoordForm {
        let mut out = CoordForm::zero(self.chart, self.bundle, self.degree + 1);
        for (b, c) in &self.terms {
            for v in c.free_vars() {
                let mut idx = Vec::with_capacity(b.len() + 1);
                idx.push(v);
                idx.extend(b.iter().copied());
                if let Some((basis, sign)) = normalize_basis(idx) {
                    out.accumulate(basis, signed(c.diff(v), sign));
                }
            }
        }
        out
    }

    /// Interior product `i(v)F` with a single vector field, contracting into
    /// the first slot.
    pub fn interior(&self, v: &VectorField) -> Result<CoordForm, GeometryError> {
        if v.chart != self.chart || v.bundle != self.bundle {
            return Err(GeometryError::ChartMismatch {
                left: format!("vector field on {}", v.bundle),
                right: format!("form on {}", self.bundle),
            });
        }
        if self.degree == 0 {
            return Err(GeometryError::DegreeTooSmall { degree: 0, needed: 1 });
        }
        let mut out = CoordForm::zero(self.chart, self.bundle, self.degree - 1);
        for (b, c) in &self.terms {
            for (j, coord) in b.iter().enumerate() {
                if let Some(comp) = v.components.get(coord) {
                    let mut rest = b.clone();
                    rest.remove(j);
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    out.accumulate(rest, signed(comp * c, sign));
                }
            }
        }
        Ok(out)
    }

    /// Pull back along a map given in coordinates: each source coordinate `z`
    /// is replaced by `map[z]` (identity when absent) in coefficients, and
    /// `dz` by `d(map[z])` on the target space.
    pub fn pullback(
        &self,
        target_chart: BundleChart,
        target_bundle: Bundle,
        map: &BTreeMap<CoordId, Expr>,
    ) -> CoordForm {
        let image = |c: CoordId| map.get(&c).cloned().unwrap_or_else(|| Expr::var(c));
        let mut out = CoordForm::zero(target_chart, target_bundle, self.degree);
        for (b, c) in &self.terms {
            let mut acc = CoordForm::scalar(target_chart, target_bundle, c.substitute(map));
            for coord in b {
                let dz = CoordForm::scalar(target_chart, target_bundle, image(*coord)).exterior_derivative();
                acc = acc.wedge(&dz).expect("same target space");
            }
            for (bb, cc) in acc.terms {
                out.accumulate(bb, cc);
            }
        }
        out
    }

    pub fn to_latex(&self) -> String {
        self.render(|e| e.to_latex(), |c| format!("d{}", c.latex()), " \\wedge ", " ")
    }

    fn render(
        &self,
        coef: impl Fn(&Expr) -> String,
        dname: impl Fn(&CoordId) -> String,
        wedge: &str,
        times: &str,
    ) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(b, c)| {
                let basis: Vec<String> = b.iter().map(&dname).collect();
                let basis = basis.join(wedge);
                let cs = coef(c);
                let cs = if matches!(c.node(), crate::symbolic::Node::Add(_)) {
                    format!("({cs})")
                } else {
                    cs
                };
                match (basis.is_empty(), c.is_literal_one()) {
                    (true, _) => cs,
                    (false, true) => basis,
                    (false, false) => format!("{cs}{times}{basis}"),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Display for CoordForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(|e| e.to_string(), |c| format!("d{}", c.name()), "^", "*"))
    }
}

/// A vector field `Σ v^c ∂/∂c` on a bundle chart.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: BundleChart,
    bundle: Bundle,
    components: BTreeMap<CoordId, Expr>,
}

impl VectorField {
    pub fn new(chart: BundleChart, bundle: Bundle, components: BTreeMap<CoordId, Expr>) -> Self {
        let components = components
            .into_iter()
            .map(|(c, e)| (c, simplify(&e)))
            .filter(|(_, e)| !e.is_literal_zero())
            .collect();
        VectorField {
            chart,
            bundle,
            components,
        }
    }

    /// The coordinate vector field `∂/∂c`.
    pub fn coordinate(chart: BundleChart, bundle: Bundle, c: CoordId) -> Self {
        let mut m = BTreeMap::new();
        m.insert(c, Expr::one());
        VectorField::new(chart, bundle, m)
    }

    pub fn chart(&self) -> BundleChart {
        self.chart
    }

    pub fn bundle(&self) -> Bundle {
        self.bundle
    }

    pub fn component(&self, c: CoordId) -> Expr {
        self.components.get(&c).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn components(&self) -> &BTreeMap<CoordId, Expr> {
        &self.components
    }

    /// Directional derivative `v(f) = Σ v^c ∂f/∂c`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let terms: Vec<Expr> = self
            .components
            .iter()
            .filter(|(c, _)| f.depends_on(**c))
            .map(|(c, vc)| vc * f.diff(*c))
            .collect();
        simplify(&Expr::sum(terms))
    }

    /// Lie bracket `[self, other]`, componentwise over the chart coordinates.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let coords: std::collections::BTreeSet<CoordId> =
            self.components.keys().chain(other.components.keys()).copied().collect();
        let comps = coords
            .into_iter()
            .map(|c| {
                let val = self.apply(&other.component(c)) - other.apply(&self.component(c));
                (c, val)
            })
            .collect();
        VectorField::new(self.chart, self.bundle, comps)
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField::new(
            self.chart,
            self.bundle,
            self.components.iter().map(|(c, e)| (*c, f * e)).collect(),
        )
    }
}
