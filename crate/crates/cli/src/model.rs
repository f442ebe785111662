//! Line-oriented model files: `[section]` headers followed by `key = value`
//! lines. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use hdw_forge_core::geometry::{Bundle, BundleChart};
use hdw_forge_core::hdw::{GaugeChoice, GaugeKey};
use hdw_forge_core::symbolic::{CoordId, Expr};
use sha2::{Digest, Sha256};

use crate::expr_parse::{parse_constant, parse_expr, suggest, ExprError, Scope};

#[derive(Clone, Debug, PartialEq)]
pub struct ModelError {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub suggestions: Vec<String>,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.file, self.line, self.column, self.message)?;
        if !self.suggestions.is_empty() {
            write!(
                f,
                " (did you mean {}?)",
                self.suggestions
                    .iter()
                    .map(|s| format!("`{s}`"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )?;
        }
        Ok(())
    }
}

impl std::error::Error for ModelError {}

#[derive(Clone, Debug, PartialEq)]
pub enum Physics {
    Hamiltonian(Expr),
    Lagrangian(Expr),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Steps {
    Count(usize),
    MaxStep(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveSpec {
    Ode {
        t0: f64,
        t1: f64,
        steps: Steps,
        extended: bool,
        init: BTreeMap<CoordId, f64>,
        /// Analytic reference values as functions of `x1`.
        reference: BTreeMap<CoordId, Expr>,
    },
    Field {
        t0: f64,
        t1: f64,
        /// `None` selects the default step `dx/2`.
        steps: Option<Steps>,
        x0: f64,
        x1: f64,
        points: usize,
        init_y: Expr,
        init_pt: Expr,
        /// Analytic reference values as functions of `(x1, x2)`.
        reference: BTreeMap<CoordId, Expr>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Embedding {
    /// The whole restricted bundle with the model Hamiltonian.
    Identity,
    /// Image of the momentum map of a Lagrangian affine in the velocities.
    MomentumImage,
    Explicit {
        dim: usize,
        images: BTreeMap<CoordId, Expr>,
        h: Expr,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubmanifoldSpec {
    pub embedding: Embedding,
    /// Explicit sample points; when empty, `sample_count` seeded points in
    /// `[0.2, 1.2]` per parameter are used.
    pub samples: Vec<Vec<f64>>,
    pub sample_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    /// File name without directories.
    pub name: String,
    pub sha256: String,
    pub chart: BundleChart,
    pub physics: Physics,
    pub gauge: Option<GaugeChoice>,
    pub solve: Option<SolveSpec>,
    pub submanifold: Option<SubmanifoldSpec>,
}

#[derive(Clone, Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

#[derive(Clone, Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 6] = ["bundle", "hamiltonian", "lagrangian", "gauge", "solve", "submanifold"];

struct Reader {
    file: String,
}

impl Reader {
    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> ModelError {
        ModelError {
            file: self.file.clone(),
            line,
            column,
            message: message.into(),
            suggestions: Vec::new(),
        }
    }

    fn expr_err(&self, e: &Entry, err: ExprError) -> ModelError {
        ModelError {
            file: self.file.clone(),
            line: e.line,
            column: e.value_col + err.column - 1,
            message: format!("in `{}`: {}", e.key, err.message),
            suggestions: err.suggestions,
        }
    }

    fn sections(&self, text: &str) -> Result<Vec<Section>, ModelError> {
        let mut out: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| self.err(line, indent + trimmed.len() + 1, "expected `]`"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    let mut e = self.err(line, indent + 2, format!("unknown section `[{name}]`"));
                    e.suggestions = suggest(name, &SECTIONS.map(String::from));
                    return Err(e);
                }
                if out.iter().any(|s| s.name == name) {
                    return Err(self.err(line, indent + 1, format!("section `[{name}]` appears twice")));
                }
                out.push(Section {
                    name: name.into(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let section = out
                .last_mut()
                .ok_or_else(|| self.err(line, indent + 1, "entry outside of any section"))?;
            let eq = content
                .find('=')
                .ok_or_else(|| self.err(line, indent + 1, "expected `key = value`"))?;
            let key = content[..eq].trim();
            if key.is_empty() {
                return Err(self.err(line, indent + 1, "missing key before `=`"));
            }
            let after = &content[eq + 1..];
            let value_offset = after.len() - after.trim_start().len();
            let value = after.trim();
            let value_col = content[..eq + 1 + value_offset].chars().count() + 1;
            if value.is_empty() {
                return Err(self.err(line, value_col, format!("missing value for `{key}`")));
            }
            if section.entries.iter().any(|e| e.key == key) {
                return Err(self.err(line, indent + 1, format!("duplicate key `{key}`")));
            }
            section.entries.push(Entry {
                key: key.into(),
                value: value.into(),
                line,
                key_col: content[..eq].chars().count() - content[..eq].trim_start().chars().count() + 1,
                value_col,
            });
        }
        Ok(out)
    }

    fn unknown_key(&self, e: &Entry, allowed: &[&str]) -> ModelError {
        let mut err = self.err(e.line, e.key_col, format!("unknown key `{}`", e.key));
        err.suggestions = suggest(&e.key, &allowed.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        err
    }

    fn integer(&self, e: &Entry) -> Result<usize, ModelError> {
        e.value.parse::<usize>().map_err(|_| {
            self.err(
                e.line,
                e.value_col,
                format!("`{}` must be a non-negative integer", e.key),
            )
        })
    }

    fn constant(&self, e: &Entry, chart: BundleChart) -> Result<f64, ModelError> {
        parse_constant(&e.value, chart).map_err(|err| self.expr_err(e, err))
    }

    fn expr(&self, e: &Entry, scope: &Scope) -> Result<Expr, ModelError> {
        parse_expr(&e.value, scope).map_err(|err| self.expr_err(e, err))
    }

    fn boolean(&self, e: &Entry) -> Result<bool, ModelError> {
        match e.value.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(self.err(e.line, e.value_col, format!("`{}` must be true or false", e.key))),
        }
    }

    fn coord_key(&self, e: &Entry, name: &str, chart: BundleChart, bundle: Bundle) -> Result<CoordId, ModelError> {
        match CoordId::parse_name(name) {
            Some(c) if chart.contains(c, bundle) && !matches!(c, CoordId::Base(_)) => Ok(c),
            _ => {
                let names: Vec<String> = chart
                    .coords(bundle)
                    .into_iter()
                    .filter(|c| !matches!(c, CoordId::Base(_)))
                    .map(|c| c.name())
                    .collect();
                let mut err = self.err(
                    e.line,
                    e.key_col,
                    format!("`{name}` is not a field coordinate of {bundle}"),
                );
                err.suggestions = suggest(name, &names);
                Err(err)
            }
        }
    }

    fn chart(&self, sections: &[Section]) -> Result<BundleChart, ModelError> {
        let s = sections
            .iter()
            .find(|s| s.name == "bundle")
            .ok_or_else(|| self.err(1, 1, "missing `[bundle]` section"))?;
        let (mut m, mut n) = (None, None);
        for e in &s.entries {
            match e.key.as_str() {
                "m" => m = Some(self.integer(e)?),
                "n" => n = Some(self.integer(e)?),
                _ => return Err(self.unknown_key(e, &["m", "n"])),
            }
        }
        let m = m.ok_or_else(|| self.err(s.line, 1, "`[bundle]` needs `m`"))?;
        let n = n.ok_or_else(|| self.err(s.line, 1, "`[bundle]` needs `n`"))?;
        BundleChart::new(m, n).map_err(|msg| self.err(s.line, 1, msg))
    }

    fn physics(&self, sections: &[Section], chart: BundleChart) -> Result<Physics, ModelError> {
        let ham = sections.iter().find(|s| s.name == "hamiltonian");
        let lag = sections.iter().find(|s| s.name == "lagrangian");
        let single = |s: &Section, key: &str, bundle: Bundle| -> Result<Expr, ModelError> {
            let mut found = None;
            for e in &s.entries {
                if e.key != key {
                    return Err(self.unknown_key(e, &[key]));
                }
                found = Some(self.expr(e, &Scope::new(chart, bundle))?);
            }
            found.ok_or_else(|| self.err(s.line, 1, format!("`[{}]` needs `{key}`", s.name)))
        };
        match (ham, lag) {
            (Some(h), None) => Ok(Physics::Hamiltonian(single(h, "h", Bundle::Restricted)?)),
            (None, Some(l)) => Ok(Physics::Lagrangian(single(l, "L", Bundle::Jet)?)),
            (Some(_), Some(l)) => Err(self.err(
                l.line,
                1,
                "a model has either `[hamiltonian]` or `[lagrangian]`, not both",
            )),
            (None, None) => Err(self.err(1, 1, "missing `[hamiltonian]` or `[lagrangian]` section")),
        }
    }

    fn gauge(&self, s: &Section, chart: BundleChart) -> Result<GaugeChoice, ModelError> {
        let mut user_table = false;
        let mut table = BTreeMap::new();
        for e in &s.entries {
            if e.key == "mode" {
                user_table = match e.value.as_str() {
                    "equal-split" => false,
                    "user-table" => true,
                    other => {
                        let mut err = self.err(e.line, e.value_col, format!("unknown gauge mode `{other}`"));
                        err.suggestions = suggest(other, &["equal-split".into(), "user-table".into()]);
                        return Err(err);
                    }
                };
                continue;
            }
            let key = GaugeKey::parse(&e.key).ok_or_else(|| {
                self.err(
                    e.line,
                    e.key_col,
                    format!("`{}` is not `mode`, `G[A][rho][nu]` or `psi[A][nu]`", e.key),
                )
            })?;
            table.insert(key, self.expr(e, &Scope::new(chart, Bundle::Restricted))?);
        }
        let g = if user_table {
            GaugeChoice::user_table(table)
        } else {
            GaugeChoice::equal_split_with(table)
        };
        g.validate(chart).map_err(|err| self.err(s.line, 1, err.to_string()))?;
        Ok(g)
    }

    fn solve(&self, s: &Section, chart: BundleChart) -> Result<SolveSpec, ModelError> {
        let get = |k: &str| s.entries.iter().find(|e| e.key == k);
        let kind =
            get("kind").ok_or_else(|| self.err(s.line, 1, "`[solve]` needs `kind = ode` or `kind = field1p1`"))?;
        let required = |k: &str| get(k).ok_or_else(|| self.err(s.line, 1, format!("`[solve]` needs `{k}`")));
        let steps = |count_key: &str| -> Result<Option<Steps>, ModelError> {
            match (get(count_key), get("dt")) {
                (Some(_), Some(e)) => Err(self.err(
                    e.line,
                    e.key_col,
                    format!("give either `{count_key}` or `dt`, not both"),
                )),
                (Some(e), None) => {
                    let n = self.integer(e)?;
                    if n == 0 {
                        return Err(self.err(e.line, e.value_col, format!("`{count_key}` must be at least 1")));
                    }
                    Ok(Some(Steps::Count(n)))
                }
                (None, Some(e)) => {
                    let dt = self.constant(e, chart)?;
                    if dt <= 0.0 {
                        return Err(self.err(e.line, e.value_col, "`dt` must be positive"));
                    }
                    Ok(Some(Steps::MaxStep(dt)))
                }
                (None, None) => Ok(None),
            }
        };
        let range = |lo: &str, hi: &str| -> Result<(f64, f64), ModelError> {
            let (a, b) = (required(lo)?, required(hi)?);
            let (va, vb) = (self.constant(a, chart)?, self.constant(b, chart)?);
            if vb <= va {
                return Err(self.err(b.line, b.value_col, format!("`{hi}` must exceed `{lo}`")));
            }
            Ok((va, vb))
        };
        match kind.value.as_str() {
            "ode" => {
                if chart.m() != 1 {
                    return Err(self.err(kind.line, kind.value_col, "`kind = ode` needs m = 1"));
                }
                let allowed = ["kind", "t0", "t1", "steps", "dt", "extended", "init.*", "reference.*"];
                let extended = get("extended").map(|e| self.boolean(e)).transpose()?.unwrap_or(false);
                let bundle = if extended { Bundle::Extended } else { Bundle::Restricted };
                let (t0, t1) = range("t0", "t1")?;
                let steps = steps("steps")?.ok_or_else(|| self.err(s.line, 1, "`[solve]` needs `steps` or `dt`"))?;
                let mut init = BTreeMap::new();
                let mut reference = BTreeMap::new();
                for e in &s.entries {
                    if let Some(name) = e.key.strip_prefix("init.") {
                        init.insert(self.coord_key(e, name, chart, bundle)?, self.constant(e, chart)?);
                    } else if let Some(name) = e.key.strip_prefix("reference.") {
                        let c = self.coord_key(e, name, chart, bundle)?;
                        reference.insert(c, self.expr(e, &Scope::base(chart, &[1]))?);
                    } else if !matches!(e.key.as_str(), "kind" | "t0" | "t1" | "steps" | "dt" | "extended") {
                        return Err(self.unknown_key(e, &allowed));
                    }
                }
                for c in chart
                    .coords(bundle)
                    .into_iter()
                    .filter(|c| !matches!(c, CoordId::Base(_)))
                {
                    if !init.contains_key(&c) {
                        return Err(self.err(s.line, 1, format!("`[solve]` needs `init.{}`", c.name())));
                    }
                }
                Ok(SolveSpec::Ode {
                    t0,
                    t1,
                    steps,
                    extended,
                    init,
                    reference,
                })
            }
            "field1p1" => {
                if chart.m() != 2 || chart.n() != 1 {
                    return Err(self.err(kind.line, kind.value_col, "`kind = field1p1` needs m = 2, n = 1"));
                }
                let allowed = [
                    "kind",
                    "t0",
                    "t1",
                    "t_steps",
                    "dt",
                    "x0",
                    "x1",
                    "points",
                    "init.*",
                    "reference.*",
                ];
                let (t0, t1) = range("t0", "t1")?;
                let (x0, x1) = range("x0", "x1")?;
                let points_entry = required("points")?;
                let points = self.integer(points_entry)?;
                if points < 5 {
                    return Err(self.err(points_entry.line, points_entry.value_col, "`points` must be at least 5"));
                }
                let steps = steps("t_steps")?;
                let profile = Scope::base(chart, &[2]);
                let (mut init_y, mut init_pt) = (None, None);
                let mut reference = BTreeMap::new();
                for e in &s.entries {
                    if let Some(name) = e.key.strip_prefix("init.") {
                        match self.coord_key(e, name, chart, Bundle::Restricted)? {
                            c if c == CoordId::y(1) => init_y = Some(self.expr(e, &profile)?),
                            c if c == CoordId::p(1, 1) => init_pt = Some(self.expr(e, &profile)?),
                            _ => {
                                return Err(self.err(
                                    e.line,
                                    e.key_col,
                                    "only `init.y1` and `init.p1_1` are evolved; `p1_2` is recovered from y1",
                                ))
                            }
                        }
                    } else if let Some(name) = e.key.strip_prefix("reference.") {
                        let c = self.coord_key(e, name, chart, Bundle::Restricted)?;
                        reference.insert(c, self.expr(e, &Scope::base(chart, &[1, 2]))?);
                    } else if !allowed[..8].contains(&e.key.as_str()) {
                        return Err(self.unknown_key(e, &allowed));
                    }
                }
                Ok(SolveSpec::Field {
                    t0,
                    t1,
                    steps,
                    x0,
                    x1,
                    points,
                    init_y: init_y.ok_or_else(|| self.err(s.line, 1, "`[solve]` needs `init.y1`"))?,
                    init_pt: init_pt.ok_or_else(|| self.err(s.line, 1, "`[solve]` needs `init.p1_1`"))?,
                    reference,
                })
            }
            other => {
                let mut err = self.err(kind.line, kind.value_col, format!("unknown solve kind `{other}`"));
                err.suggestions = suggest(other, &["ode".into(), "field1p1".into()]);
                Err(err)
            }
        }
    }

    fn submanifold(&self, s: &Section, chart: BundleChart) -> Result<SubmanifoldSpec, ModelError> {
        let get = |k: &str| s.entries.iter().find(|e| e.key == k);
        let mut samples = Vec::new();
        let mut sample_count = 10;
        let embedding = match get("embedding").map(|e| e.value.as_str()) {
            Some("identity") => Embedding::Identity,
            Some("momentum-image") => Embedding::MomentumImage,
            Some("explicit") | None => {
                let dim_entry =
                    get("params").ok_or_else(|| self.err(s.line, 1, "explicit embeddings need `params`"))?;
                let dim = self.integer(dim_entry)?;
                if dim == 0 {
                    return Err(self.err(dim_entry.line, dim_entry.value_col, "`params` must be at least 1"));
                }
                let scope = Scope::new(chart, Bundle::Parameters(dim));
                let mut images = BTreeMap::new();
                let mut h = None;
                for e in &s.entries {
                    if e.key == "h" {
                        h = Some(self.expr(e, &scope)?);
                    } else if let Some(c) =
                        CoordId::parse_name(&e.key).filter(|c| chart.contains(*c, Bundle::Restricted))
                    {
                        images.insert(c, self.expr(e, &scope)?);
                    }
                }
                for c in chart.coords(Bundle::Restricted) {
                    if !images.contains_key(&c) {
                        return Err(self.err(s.line, 1, format!("embedding needs an image for `{}`", c.name())));
                    }
                }
                Embedding::Explicit {
                    dim,
                    images,
                    h: h.ok_or_else(|| self.err(s.line, 1, "explicit embeddings need `h`"))?,
                }
            }
            Some(other) => {
                let e = get("embedding").unwrap();
                let mut err = self.err(e.line, e.value_col, format!("unknown embedding `{other}`"));
                err.suggestions = suggest(other, &["identity".into(), "momentum-image".into(), "explicit".into()]);
                return Err(err);
            }
        };
        for e in &s.entries {
            match e.key.as_str() {
                "samples" => sample_count = self.integer(e)?,
                k if k.starts_with("sample") => {
                    let point = e
                        .value
                        .split(',')
                        .map(|v| parse_constant(v.trim(), chart))
                        .collect::<Result<Vec<f64>, _>>()
                        .map_err(|err| self.expr_err(e, err))?;
                    samples.push(point);
                }
                "embedding" | "params" | "h" => {}
                k if CoordId::parse_name(k).is_some_and(|c| chart.contains(c, Bundle::Restricted))
                    && matches!(embedding, Embedding::Explicit { .. }) => {}
                _ => return Err(self.unknown_key(e, &["embedding", "params", "h", "samples", "sample.N"])),
            }
        }
        Ok(SubmanifoldSpec {
            embedding,
            samples,
            sample_count,
        })
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Parse model text. `name` is used in error positions and reports.
pub fn parse_model_text(name: &str, text: &str) -> Result<ModelFile, ModelError> {
    let reader = Reader { file: name.into() };
    let sections = reader.sections(text)?;
    let chart = reader.chart(&sections)?;
    let physics = reader.physics(&sections, chart)?;
    let find = |n: &str| sections.iter().find(|s| s.name == n);
    let gauge = find("gauge").map(|s| reader.gauge(s, chart)).transpose()?;
    let solve = find("solve").map(|s| reader.solve(s, chart)).transpose()?;
    let submanifold = find("submanifold").map(|s| reader.submanifold(s, chart)).transpose()?;
    Ok(ModelFile {
        name: name.into(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
        chart,
        physics,
        gauge,
        solve,
        submanifold,
    })
}

pub fn parse_model(path: &Path) -> Result<ModelFile, ModelError> {
    let name = file_name(path);
    let text = std::fs::read_to_string(path).map_err(|e| ModelError {
        file: name.clone(),
        line: 0,
        column: 0,
        message: format!("cannot read model file: {e}"),
        suggestions: Vec::new(),
    })?;
    parse_model_text(&name, &text)
}

/// Read a file holding only a `[gauge]` section, for a given chart.
pub fn parse_gauge_file(path: &Path, chart: BundleChart) -> Result<GaugeChoice, ModelError> {
    let name = file_name(path);
    let reader = Reader { file: name.clone() };
    let text = std::fs::read_to_string(path).map_err(|e| reader.err(0, 0, format!("cannot read gauge file: {e}")))?;
    let sections = reader.sections(&text)?;
    let gauge = sections
        .iter()
        .find(|s| s.name == "gauge")
        .ok_or_else(|| reader.err(1, 1, "missing `[gauge]` section"))?;
    if let Some(other) = sections.iter().find(|s| s.name != "gauge") {
        return Err(reader.err(other.line, 1, "a gauge file holds only a `[gauge]` section"));
    }
    reader.gauge(gauge, chart)
}
