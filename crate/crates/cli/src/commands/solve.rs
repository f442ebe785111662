use std::collections::BTreeMap;
use std::path::PathBuf;

use hdw_forge_core::hdw::{derive_extended, derive_restricted, HdwField};
use hdw_forge_core::solver::{
    conservation_diagnostics, field_energy_diagnostics, max_discrepancy, project_extended, solve_field_1p1, solve_ode,
    GridSpec, PeriodicAxis, SectionGrid, SolveReport, SolverError, TimeSpan,
};
use hdw_forge_core::symbolic::{simplify, CompiledExpr, CoordId, Expr};
use serde_json::{json, Map, Value};

use super::{input, load_injection, Options, Outcome, Session};
use crate::error::CliError;
use crate::grid_io::{grid_table, GridTable};
use crate::model::{SolveSpec, Steps};
use crate::report::{finite, render_json, write_atomic, CheckOutcome, TOOL, VERSION};

pub const GRID_SCHEMA: &str = "hdw-forge-grid/v1";

/// A completed run before anything is written.
struct Run {
    grid: SectionGrid,
    table: GridTable,
    metrics: Map<String, Value>,
    lines: Vec<String>,
}

fn span(t0: f64, t1: f64, steps: Option<Steps>, dt_flag: Option<f64>, default_dt: f64) -> Result<TimeSpan, CliError> {
    let r = match (dt_flag, steps) {
        (Some(dt), _) => TimeSpan::with_max_step(t0, t1, dt),
        (None, Some(Steps::Count(n))) => TimeSpan::new(t0, t1, n),
        (None, Some(Steps::MaxStep(dt))) => TimeSpan::with_max_step(t0, t1, dt),
        (None, None) => TimeSpan::with_max_step(t0, t1, default_dt),
    };
    r.map_err(input)
}

fn solver_err(e: SolverError) -> CliError {
    match e {
        SolverError::Aborted { .. } => CliError::Failure(format!("solver aborted: {e}")),
        other => CliError::Input(other.to_string()),
    }
}

fn field_for(s: &Session, opts: &Options, extended: bool) -> Result<HdwField, CliError> {
    let hm = s.hamiltonian()?;
    let x = if extended {
        derive_extended(hm, &s.gauge)
    } else {
        derive_restricted(hm, &s.gauge)
    }
    .map_err(input)?;
    match load_injection(opts, &s.model)? {
        Some(inj) => inj.apply(&x),
        None => Ok(x),
    }
}

/// Max-norm distance between stored fields and analytic references.
fn reference_errors(
    grid: &SectionGrid,
    reference: &BTreeMap<CoordId, Expr>,
) -> Result<BTreeMap<CoordId, f64>, CliError> {
    let span = grid.spec.time();
    let mut out = BTreeMap::new();
    for (c, e) in reference {
        let values = grid
            .field(*c)
            .ok_or_else(|| CliError::Input(format!("reference for `{c}`, which this run does not store")))?;
        let slots = [CoordId::x(1), CoordId::x(2)];
        let compiled = CompiledExpr::compile(e, &slots).map_err(input)?;
        let mut worst: f64 = 0.0;
        let points = match grid.spec {
            GridSpec::Line(_) => 1,
            GridSpec::Plane(_, axis) => axis.points,
        };
        for k in 0..=span.steps {
            for i in 0..points {
                let x = match grid.spec {
                    GridSpec::Line(_) => 0.0,
                    GridSpec::Plane(_, axis) => axis.x(i),
                };
                let exact = compiled.eval(&[span.time(k), x]).map_err(input)?;
                let d = (values[k * points + i] - exact).abs();
                worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
            }
        }
        out.insert(*c, worst);
    }
    Ok(out)
}

fn conservation_json(r: &SolveReport) -> Value {
    json!({
        "quantity": r.series_label,
        "initial": finite(r.series[0]),
        "final": finite(*r.series.last().expect("at least one level")),
        "drift": finite(r.drift),
        "relative_drift": finite(r.relative_drift),
        "drift_over_dt4": finite(r.drift_constant),
        "energy_residual": r.energy_residual.map(finite),
    })
}

fn run(s: &Session, opts: &Options) -> Result<Run, CliError> {
    let spec = s
        .model
        .solve
        .as_ref()
        .ok_or_else(|| CliError::Input(format!("{}: no `[solve]` block", s.model.name)))?;
    if let Some(dt) = opts.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CliError::Input(format!("--dt must be positive (got {dt})")));
        }
    }
    let mut metrics = Map::new();
    let mut lines = Vec::new();
    let mut preamble = vec![
        ("tool".to_string(), format!("{TOOL} {VERSION}")),
        ("schema".into(), GRID_SCHEMA.into()),
        ("model".into(), s.model.name.clone()),
        ("model_sha256".into(), s.model.sha256.clone()),
        ("gauge".into(), s.gauge.mode().label().into()),
    ];
    let grid = match spec {
        SolveSpec::Ode {
            t0,
            t1,
            steps,
            extended,
            init,
            reference,
        } => {
            if opts.grid.is_some() {
                return Err(CliError::Input("--grid applies to `kind = field1p1` runs only".into()));
            }
            let span = span(*t0, *t1, Some(*steps), opts.dt, 0.0)?;
            let x = field_for(s, opts, *extended)?;
            let grid = solve_ode(&x, init, span).map_err(solver_err)?;
            if *extended {
                let big_h = simplify(&(Expr::var(CoordId::pe()) + s.hamiltonian()?.h()));
                let rep = conservation_diagnostics(&grid, &big_h).map_err(solver_err)?;
                let restricted = field_for(s, opts, false)?;
                let mut init_r = init.clone();
                init_r.remove(&CoordId::pe());
                let direct = solve_ode(&restricted, &init_r, span).map_err(solver_err)?;
                let projected = project_extended(&grid).map_err(solver_err)?;
                let disc = max_discrepancy(&projected, &direct).map_err(solver_err)?;
                lines.push(format!(
                    "H drift {:.3e}, projection discrepancy {disc:.3e}{}",
                    rep.drift,
                    rep.energy_residual
                        .map_or(String::new(), |r| format!(", energy residual {r:.3e}"))
                ));
                metrics.insert("conservation".into(), conservation_json(&rep));
                metrics.insert("projection_discrepancy".into(), finite(disc));
            }
            let errs = reference_errors(&grid, reference)?;
            insert_reference(&mut metrics, &mut lines, &errs);
            preamble.extend([
                ("kind".into(), "ode".into()),
                ("field".into(), if *extended { "extended" } else { "restricted" }.into()),
            ]);
            grid
        }
        SolveSpec::Field {
            t0,
            t1,
            steps,
            x0,
            x1,
            points,
            init_y,
            init_pt,
            reference,
        } => {
            let (steps, points) = match opts.grid {
                Some((_, p)) if p < 5 => return Err(CliError::Input("--grid needs at least 5 spatial points".into())),
                Some((0, _)) => return Err(CliError::Input("--grid needs at least 1 time step".into())),
                Some((t, p)) => (Some(Steps::Count(t)), p),
                None => (*steps, *points),
            };
            let axis = PeriodicAxis::new(*x0, *x1, points).map_err(input)?;
            let span = span(*t0, *t1, steps, opts.dt, axis.dx() / 2.0)?;
            let profile = |e: &Expr| -> Result<Vec<f64>, CliError> {
                let c = CompiledExpr::compile(e, &[CoordId::x(2)]).map_err(input)?;
                (0..points).map(|i| c.eval(&[axis.x(i)]).map_err(input)).collect()
            };
            let x = field_for(s, opts, false)?;
            let grid = solve_field_1p1(&x, &profile(init_y)?, &profile(init_pt)?, span, axis).map_err(solver_err)?;
            let rep = field_energy_diagnostics(&grid, s.hamiltonian()?.h()).map_err(solver_err)?;
            lines.push(format!("energy relative drift {:.3e}", rep.relative_drift));
            metrics.insert("conservation".into(), conservation_json(&rep));
            let errs = reference_errors(&grid, reference)?;
            insert_reference(&mut metrics, &mut lines, &errs);
            preamble.extend([
                ("kind".into(), "field1p1".into()),
                ("field".into(), "restricted".into()),
                ("x0".into(), format!("{x0:?}")),
                ("x1".into(), format!("{x1:?}")),
                ("points".into(), points.to_string()),
            ]);
            grid
        }
    };
    let span = grid.spec.time();
    preamble.extend([
        ("scheme".into(), grid.meta.scheme.clone()),
        ("t0".into(), format!("{:?}", span.t0)),
        ("t1".into(), format!("{:?}", span.t1)),
        ("steps".into(), span.steps.to_string()),
        ("dt".into(), format!("{:?}", span.dt())),
    ]);
    if let Some(split) = &grid.meta.split {
        preamble.push(("evolution".into(), split.clone()));
    }
    let table = grid_table(&grid, preamble);
    Ok(Run {
        grid,
        table,
        metrics,
        lines,
    })
}

fn insert_reference(metrics: &mut Map<String, Value>, lines: &mut Vec<String>, errs: &BTreeMap<CoordId, f64>) {
    if errs.is_empty() {
        return;
    }
    let worst = errs.values().copied().fold(0.0, f64::max);
    let per: Map<String, Value> = errs.iter().map(|(c, e)| (c.name(), finite(*e))).collect();
    metrics.insert(
        "reference_error".into(),
        json!({ "max": finite(worst), "per_field": per }),
    );
    lines.push(format!("max error vs reference {worst:.3e}"));
}

fn solve_json(run: &Run) -> Value {
    let span = run.grid.spec.time();
    let mut grid = json!({
        "t0": span.t0,
        "t1": span.t1,
        "steps": span.steps,
        "dt": span.dt(),
        "columns": run.table.header,
        "rows": run.table.rows.len(),
    });
    if let GridSpec::Plane(_, axis) = run.grid.spec {
        grid["x0"] = json!(axis.x0);
        grid["x1"] = json!(axis.x1);
        grid["points"] = json!(axis.points);
        grid["dx"] = json!(axis.dx());
    }
    json!({
        "scheme": run.grid.meta.scheme,
        "field": format!("{:?}", run.grid.meta.kind).to_lowercase(),
        "grid": grid,
        "metrics": run.metrics,
        "evolution": run.grid.meta.split,
        "warnings": run.grid.meta.warnings,
    })
}

fn stem(name: &str) -> &str {
    name.rsplit_once('.').map_or(name, |(s, _)| s)
}

fn out_dir(opts: &Options) -> PathBuf {
    opts.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

pub fn solve(s: &Session, opts: &Options) -> Result<Outcome, CliError> {
    let run = run(s, opts)?;
    let mut report = s.report("solve");
    let stem = stem(&s.model.name);
    let csv_name = format!("{stem}.csv");
    let json_name = format!("{stem}.report.json");
    let mut solve = solve_json(&run);
    solve["files"] = json!({ "grid": csv_name, "report": json_name });
    report.set("solve", solve);

    let dir = out_dir(opts);
    let csv = run.table.to_csv();
    let json_text = render_json(&report.to_json(&s.model));
    let csv_path = write_atomic(&dir, &csv_name, csv.as_bytes())?;
    let json_path = match write_atomic(&dir, &json_name, json_text.as_bytes()) {
        Ok(p) => p,
        Err(e) => {
            let _ = std::fs::remove_file(&csv_path);
            return Err(e.into());
        }
    };

    let mut out = Outcome::new(report);
    out.text.push(s.header_line());
    let span = run.grid.spec.time();
    out.text.push(format!(
        "{} over [{}, {}] with {} steps (dt = {:.3e}), {} rows",
        run.grid.meta.scheme,
        span.t0,
        span.t1,
        span.steps,
        span.dt(),
        run.table.rows.len()
    ));
    out.text.extend(run.lines.iter().map(|l| format!("  {l}")));
    out.text
        .extend(run.grid.meta.warnings.iter().map(|w| format!("  warning: {w}")));
    out.text
        .push(format!("wrote {} and {}", csv_path.display(), json_path.display()));
    out.latex.push(format!("% {} {}", s.model.name, run.grid.meta.scheme));
    out.csv = csv;
    out.summary = Some(format!("{}: {}", s.model.name, run.lines.join("; ")));
    out.files = vec![csv_path, json_path];
    Ok(out)
}

/// Without `--dt` or `--grid`, re-solve on the discretization recorded in
/// the stored grid's preamble.
fn stored_discretization(opts: &Options, stored: &GridTable) -> Options {
    let mut opts = opts.clone();
    if opts.dt.is_some() || opts.grid.is_some() {
        return opts;
    }
    let meta = stored.preamble_map();
    let number = |k: &str| meta.get(k).and_then(|v| v.parse::<usize>().ok());
    match (meta.get("kind").copied(), number("steps"), number("points")) {
        (Some("field1p1"), Some(t), Some(p)) => opts.grid = Some((t, p)),
        (Some("ode"), _, _) => opts.dt = meta.get("dt").and_then(|v| v.parse::<f64>().ok()),
        _ => {}
    }
    opts
}

pub fn compare(s: &Session, opts: &Options) -> Result<Outcome, CliError> {
    let path = opts
        .against
        .as_ref()
        .ok_or_else(|| CliError::Input("compare needs --against <grid.csv>".into()))?;
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
    let theirs = GridTable::parse(&name, &text)?;
    let run = run(s, &stored_discretization(opts, &theirs))?;
    let hash_matches = theirs.preamble_map().get("model_sha256").copied() == Some(s.model.sha256.as_str());

    let mut checks = Vec::new();
    let (passed, detail, diff) = match run.table.max_difference(&theirs) {
        Ok(d) => (
            d <= opts.tolerance,
            format!("max difference {d:.3e}, tolerance {:.1e}", opts.tolerance),
            Some(d),
        ),
        Err(msg) => (false, msg, None),
    };
    checks.push(CheckOutcome::exact(
        "grid_matches",
        "the stored grid matches a fresh solve within the tolerance",
        passed,
        detail.clone(),
    ));
    checks.push(
        CheckOutcome::exact(
            "model_hash_matches",
            "the stored grid was produced from this exact model file",
            hash_matches,
            if hash_matches {
                "same sha256".into()
            } else {
                "sha256 differs or is missing".into()
            },
        )
        .as_diagnostic(),
    );
    let mut report = s.report("compare");
    report.set(
        "compare",
        json!({
            "against": path.file_name().map(|f| f.to_string_lossy().into_owned()),
            "tolerance": opts.tolerance,
            "max_difference": diff.map(finite),
            "solve": solve_json(&run),
        }),
    );
    report.checks = checks;
    let mut out = Outcome::new(report);
    out.text.push(s.header_line());
    out.text.push(format!("compare against {name}: {detail}"));
    if !hash_matches {
        out.text.push("  note: model hash in the grid preamble differs".into());
    }
    out.summary = Some(format!(
        "{}: {}",
        s.model.name,
        if passed { "grids match" } else { "grids differ" }
    ));
    Ok(out)
}
