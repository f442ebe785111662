//! Report documents (`hdw-forge-report/v1`) and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use hdw_forge_core::hdw::{CheckMethod, GaugeChoice, ZeroVerdict};
use hdw_forge_core::symbolic::Expr;
use serde_json::{json, Map, Value};

use crate::model::{ModelFile, Physics};

pub const SCHEMA: &str = "hdw-forge-report/v1";
pub const TOOL: &str = "hdw-forge";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One rendered equation `lhs = rhs`.
#[derive(Clone, Debug)]
pub struct Equation {
    pub lhs: String,
    pub lhs_latex: String,
    pub rhs: Expr,
}

impl Equation {
    pub fn new(lhs: impl Into<String>, lhs_latex: impl Into<String>, rhs: Expr) -> Self {
        Equation {
            lhs: lhs.into(),
            lhs_latex: lhs_latex.into(),
            rhs,
        }
    }

    pub fn text(&self) -> String {
        format!("{} = {}", self.lhs, self.rhs)
    }

    pub fn latex(&self) -> String {
        format!("{} = {}", self.lhs_latex, self.rhs.to_latex())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lhs": self.lhs,
            "rhs": self.rhs.to_string(),
            "latex": self.latex(),
        })
    }
}

pub fn equations_json(eqs: &[Equation]) -> Value {
    Value::Array(eqs.iter().map(Equation::to_json).collect())
}

/// Outcome of one machine check.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    /// The property being verified, in words.
    pub statement: String,
    pub passed: bool,
    /// Diagnostics are reported but never fail a run.
    pub diagnostic: bool,
    pub method: CheckMethod,
    pub max_abs: f64,
    pub residual: String,
}

impl CheckOutcome {
    pub fn from_verdict(name: &str, statement: &str, v: &ZeroVerdict) -> Self {
        let residual = if v.leftovers.is_empty() {
            "0".to_string()
        } else {
            v.leftovers.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
        };
        CheckOutcome {
            name: name.into(),
            statement: statement.into(),
            passed: v.holds,
            diagnostic: false,
            method: v.method,
            max_abs: v.max_abs,
            residual,
        }
    }

    /// A yes/no fact that needs no residual, such as a count.
    pub fn exact(name: &str, statement: &str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            name: name.into(),
            statement: statement.into(),
            passed,
            diagnostic: false,
            method: CheckMethod::Structural,
            max_abs: 0.0,
            residual: detail,
        }
    }

    pub fn as_diagnostic(mut self) -> Self {
        self.diagnostic = true;
        self
    }

    pub fn status(&self) -> &'static str {
        match (self.passed, self.diagnostic) {
            (true, _) => "pass",
            (false, true) => "note",
            (false, false) => "fail",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "statement": self.statement,
            "status": self.status(),
            "passed": self.passed,
            "diagnostic": self.diagnostic,
            "method": self.method.label(),
            "max_abs_residual": finite(self.max_abs),
            "residual": self.residual,
        })
    }
}

/// JSON has no NaN or infinity; map them to null.
pub fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn gauge_json(g: &GaugeChoice) -> Value {
    let entries: Map<String, Value> = g
        .table()
        .iter()
        .map(|(k, e)| (k.to_string(), Value::String(e.to_string())))
        .collect();
    json!({ "mode": g.mode().label(), "entries": entries })
}

/// A report under construction. Keys of every object are emitted sorted.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub sections: Map<String, Value>,
    pub checks: Vec<CheckOutcome>,
    pub generated_unix: u64,
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
pub fn now_unix() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return v;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            sections: Map::new(),
            checks: Vec::new(),
            generated_unix: now_unix(),
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.sections.insert(key.into(), value);
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| !c.passed && !c.diagnostic)
    }

    pub fn to_json(&self, model: &ModelFile) -> Value {
        let (physics, text) = match &model.physics {
            Physics::Hamiltonian(h) => ("hamiltonian", h.to_string()),
            Physics::Lagrangian(l) => ("lagrangian", l.to_string()),
        };
        let mut root = self.sections.clone();
        root.insert("schema".into(), json!(SCHEMA));
        root.insert("command".into(), json!(self.command));
        root.insert("generated_unix".into(), json!(self.generated_unix));
        root.insert("tool".into(), json!({ "name": TOOL, "version": VERSION }));
        root.insert(
            "model".into(),
            json!({
                "file": model.name,
                "sha256": model.sha256,
                "m": model.chart.m(),
                "n": model.chart.n(),
                "physics": physics,
                "expression": text,
            }),
        );
        if !self.checks.is_empty() {
            root.insert(
                "checks".into(),
                Value::Array(self.checks.iter().map(CheckOutcome::to_json).collect()),
            );
        }
        root.insert("status".into(), json!(if self.failed() { "failed" } else { "ok" }));
        Value::Object(root)
    }
}

/// Serialize a report for output: pretty-printed with a trailing newline.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values are serializable");
    s.push('\n');
    s
}

/// Drop the timestamp so two reports can be compared byte for byte.
pub fn without_timestamp(v: &Value) -> Value {
    let mut v = v.clone();
    if let Value::Object(map) = &mut v {
        map.remove("generated_unix");
    }
    v
}

/// Write `contents` to `dir/name` through a temporary file in the same
/// directory, so a reader never sees a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}
