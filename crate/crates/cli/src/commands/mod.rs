//! Command implementations. Each command returns an [`Outcome`]; rendering
//! it to stdout or files is left to the caller.

mod check;
mod derive;
mod legendre;
mod solve;

use std::path::{Path, PathBuf};

use hdw_forge_core::geometry::Bundle;
use hdw_forge_core::hdw::{FieldKind, GaugeChoice, HamiltonianModel, HdwError, HdwField, Provenance};
use hdw_forge_core::legendre::{hamiltonian_from_lagrangian, legendre_maps, LagrangianModel, LegendreResult};
use hdw_forge_core::symbolic::{CoordId, Expr};
use serde_json::Value;

pub use check::check;
pub use derive::derive;
pub use legendre::legendre;
pub use solve::{compare, solve};

use crate::error::CliError;
use crate::expr_parse::{parse_expr, Scope};
use crate::model::{parse_gauge_file, ModelFile, Physics};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq)]
pub enum GaugeArg {
    EqualSplit,
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
    Latex,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub gauge: Option<GaugeArg>,
    /// Overrides the time step of the solve block.
    pub dt: Option<f64>,
    /// `(time steps, spatial points)` for 1+1 runs.
    pub grid: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub debug_inject: Option<PathBuf>,
    pub against: Option<PathBuf>,
    pub tolerance: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            gauge: None,
            dt: None,
            grid: None,
            out: None,
            format: Format::Text,
            seed: 1,
            debug_inject: None,
            against: None,
            tolerance: 1e-9,
        }
    }
}

/// What a command produced, in every output format.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub text: Vec<String>,
    pub latex: Vec<String>,
    /// Tabular view; for `solve` this is the grid itself.
    pub csv: String,
    /// Files written by the command.
    pub files: Vec<PathBuf>,
    /// One-line summary for stderr.
    pub summary: Option<String>,
}

impl Outcome {
    fn new(report: Report) -> Self {
        Outcome {
            report,
            text: Vec::new(),
            latex: Vec::new(),
            csv: String::new(),
            files: Vec::new(),
            summary: None,
        }
    }
}

/// A parsed model with its Hamiltonian resolved and gauge selected.
pub struct Session {
    pub model: ModelFile,
    pub gauge: GaugeChoice,
    pub legendre: Option<LegendreResult>,
    hamiltonian: Result<HamiltonianModel, String>,
}

impl Session {
    pub fn new(model: ModelFile, opts: &Options) -> Result<Self, CliError> {
        let chart = model.chart;
        let gauge = match &opts.gauge {
            Some(GaugeArg::EqualSplit) => GaugeChoice::equal_split(),
            Some(GaugeArg::File(p)) => parse_gauge_file(p, chart)?,
            None => model.gauge.clone().unwrap_or_default(),
        };
        let (legendre, hamiltonian) = match &model.physics {
            Physics::Hamiltonian(h) => {
                let hm = HamiltonianModel::new(chart, h.clone(), Provenance::UserGiven)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                (None, Ok(hm))
            }
            Physics::Lagrangian(l) => {
                let lm = LagrangianModel::new(chart, l.clone()).map_err(|e| CliError::Input(e.to_string()))?;
                let res = legendre_maps(&lm);
                let hm = hamiltonian_from_lagrangian(&res).map_err(|e| e.to_string());
                (Some(res), hm)
            }
        };
        Ok(Session {
            model,
            gauge,
            legendre,
            hamiltonian,
        })
    }

    /// The Hamiltonian, given or induced. Degenerate Lagrangians have none.
    pub fn hamiltonian(&self) -> Result<&HamiltonianModel, CliError> {
        self.hamiltonian
            .as_ref()
            .map_err(|e| CliError::Input(format!("{}: {e}; run `legendre` for diagnostics", self.model.name)))
    }

    fn report(&self, command: &'static str) -> Report {
        let mut r = Report::new(command);
        r.set("gauge", crate::report::gauge_json(&self.gauge));
        if let Ok(hm) = &self.hamiltonian {
            let provenance = match hm.provenance() {
                Provenance::UserGiven => "user-given",
                Provenance::FromLegendre => "from-legendre",
            };
            r.set(
                "hamiltonian",
                serde_json::json!({
                    "h": hm.h().to_string(),
                    "latex": hm.h().to_latex(),
                    "provenance": provenance,
                }),
            );
        }
        r
    }

    fn header_line(&self) -> String {
        let what = match (&self.model.physics, &self.hamiltonian) {
            (Physics::Hamiltonian(h), _) => format!("h = {h}"),
            (Physics::Lagrangian(l), Ok(hm)) => format!("L = {l}, induced h = {}", hm.h()),
            (Physics::Lagrangian(l), Err(_)) => format!("L = {l}"),
        };
        let entries = match self.gauge.table().len() {
            0 => String::new(),
            1 => " with 1 entry".into(),
            k => format!(" with {k} entries"),
        };
        format!(
            "{} (m={}, n={}): {what}; gauge {}{entries}",
            self.model.name,
            self.model.chart.m(),
            self.model.chart.n(),
            self.gauge.mode().label()
        )
    }
}

/// A deliberate edit of a derived field, read from JSON:
/// `{"factor": 1, "coord": "y1", "delta": "1", "scale": "2"}`. Used to
/// confirm that the checks catch broken fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Injection {
    pub factor: usize,
    pub coord: Option<CoordId>,
    pub delta: Expr,
    pub scale: Option<Expr>,
}

impl Injection {
    pub fn load(path: &Path, model: &ModelFile) -> Result<Self, CliError> {
        let name = path.display();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| CliError::Input(format!("{name}: expected a JSON object")))?;
        let chart = model.chart;
        let scope = Scope::new(chart, Bundle::Extended);
        let expr_field = |key: &str| -> Result<Option<Expr>, CliError> {
            match obj.get(key) {
                None => Ok(None),
                Some(Value::String(s)) => parse_expr(s, &scope)
                    .map(Some)
                    .map_err(|e| CliError::Input(format!("{name}: `{key}`: {}", e.message))),
                Some(Value::Number(n)) => Ok(Some(Expr::float(n.as_f64().unwrap_or(f64::NAN)))),
                Some(_) => Err(CliError::Input(format!("{name}: `{key}` must be a string or number"))),
            }
        };
        if let Some(k) = obj
            .keys()
            .find(|k| !["factor", "coord", "delta", "scale"].contains(&k.as_str()))
        {
            return Err(CliError::Input(format!("{name}: unknown key `{k}`")));
        }
        let factor = obj.get("factor").and_then(Value::as_u64).unwrap_or(1) as usize;
        if factor == 0 || factor > chart.m() {
            return Err(CliError::Input(format!(
                "{name}: `factor` must lie in 1..={}",
                chart.m()
            )));
        }
        let coord = match obj.get("coord") {
            None => None,
            Some(Value::String(s)) => Some(
                CoordId::parse_name(s)
                    .filter(|c| chart.contains(*c, Bundle::Extended) && !matches!(c, CoordId::Base(_)))
                    .ok_or_else(|| CliError::Input(format!("{name}: `{s}` is not a vertical coordinate")))?,
            ),
            Some(_) => return Err(CliError::Input(format!("{name}: `coord` must be a string"))),
        };
        let delta = expr_field("delta")?.unwrap_or_else(Expr::zero);
        let scale = expr_field("scale")?;
        if coord.is_none() && scale.is_none() {
            return Err(CliError::Input(format!("{name}: give `coord` and `delta`, or `scale`")));
        }
        Ok(Injection {
            factor,
            coord,
            delta,
            scale,
        })
    }

    /// Apply to a field. An edit of `pe` leaves restricted fields alone; the
    /// delta must not mention `pe` for them either.
    pub fn apply(&self, x: &HdwField) -> Result<HdwField, CliError> {
        let mut out = x.clone();
        if let Some(c) = self.coord {
            let applicable =
                !(c == CoordId::pe() || self.delta.depends_on(CoordId::pe())) || x.kind() == FieldKind::Extended;
            if applicable {
                out = out.perturbed(self.factor, c, &self.delta).map_err(inject_err)?;
            }
        }
        if let Some(f) = &self.scale {
            if !f.depends_on(CoordId::pe()) || x.kind() == FieldKind::Extended {
                out = out.scaled(f);
            }
        }
        Ok(out)
    }
}

fn inject_err(e: HdwError) -> CliError {
    CliError::Input(format!("cannot apply injection: {e}"))
}

fn load_injection(opts: &Options, model: &ModelFile) -> Result<Option<Injection>, CliError> {
    opts.debug_inject
        .as_deref()
        .map(|p| Injection::load(p, model))
        .transpose()
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}
