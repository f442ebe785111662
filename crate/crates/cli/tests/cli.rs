//! End-to-end tests of the `hdw-forge` binary on the bundled models.
//!
//! Golden reports live in `tests/golden`. Set `HDW_FORGE_BLESS=1` to
//! rewrite them after an intended change.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hdw_forge::expr_parse::{parse_expr, Scope};
use hdw_forge_core::geometry::BundleChart;
use serde_json::Value;

fn geometry_chart(m: usize, n: usize) -> BundleChart {
    BundleChart::new(m, n).unwrap()
}

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn model(name: &str) -> PathBuf {
    manifest().join("models").join(name)
}

fn hdw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdw-forge"))
        .args(args)
        .env_remove("HDW_FORGE_OUT")
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn strip(mut v: Value) -> Value {
    v.as_object_mut().expect("report object").remove("generated_unix");
    v
}

/// Structural equality; floats agree to a relative 1e-9 so goldens survive
/// last-bit differences in libm.
fn same(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) if x.is_f64() || y.is_f64() => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300) || (x.abs() < 1e-13 && y.abs() < 1e-13) {
                Ok(())
            } else {
                Err(format!("{path}: {x} vs {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: length {} vs {}", x.len(), y.len()));
            }
            x.iter()
                .zip(y)
                .enumerate()
                .try_for_each(|(i, (p, q))| same(p, q, &format!("{path}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.keys().ne(y.keys()) {
                return Err(format!(
                    "{path}: keys {:?} vs {:?}",
                    x.keys().collect::<Vec<_>>(),
                    y.keys().collect::<Vec<_>>()
                ));
            }
            x.iter().try_for_each(|(k, v)| same(v, &y[k], &format!("{path}.{k}")))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} vs {b}")),
    }
}

fn golden(name: &str, actual: &Value) {
    let path = manifest().join("tests/golden").join(name);
    let actual = strip(actual.clone());
    if std::env::var_os("HDW_FORGE_BLESS").is_some() {
        std::fs::write(&path, hdw_forge::report::render_json(&actual)).unwrap();
        return;
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let expected: Value = serde_json::from_str(&text).unwrap();
    if let Err(diff) = same(&expected, &actual, "$") {
        panic!("{name} differs from golden: {diff}");
    }
}

fn run_json(cmd: &str, file: &str, extra: &[&str]) -> (i32, Value) {
    let m = model(file);
    let mut args = vec![cmd, m.to_str().unwrap(), "--format", "json"];
    args.extend_from_slice(extra);
    let o = hdw(&args);
    (code(&o), json_of(&o))
}

#[test]
fn golden_reports() {
    let cases = [
        ("derive", "oscillator.hdw", 0),
        ("check", "oscillator.hdw", 0),
        ("derive", "wave.hdw", 0),
        ("check", "wave.hdw", 0),
        ("legendre", "wave.hdw", 0),
        ("legendre", "degenerate.hdw", 0),
    ];
    for (cmd, file, expected_code) in cases {
        let (c, v) = run_json(cmd, file, &[]);
        assert_eq!(c, expected_code, "{cmd} {file}");
        assert_eq!(v["schema"], "hdw-forge-report/v1");
        golden(&format!("{}.{cmd}.json", file.trim_end_matches(".hdw")), &v);
    }
}

#[test]
fn golden_solve_reports() {
    for file in ["oscillator.hdw", "wave.hdw"] {
        let dir = tempfile::tempdir().unwrap();
        let o = hdw(&[
            "solve",
            model(file).to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let stem = file.trim_end_matches(".hdw");
        let report: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{stem}.report.json"))).unwrap())
                .unwrap();
        golden(&format!("{stem}.solve.json"), &report);
        assert!(!stderr(&o).is_empty(), "summary goes to stderr");
    }
}

#[test]
fn solve_output_is_deterministic() {
    for file in ["oscillator.hdw", "wave.hdw"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for d in [&a, &b] {
            let o = hdw(&[
                "solve",
                model(file).to_str().unwrap(),
                "--out",
                d.path().to_str().unwrap(),
            ]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
        }
        let stem = file.trim_end_matches(".hdw");
        let read = |d: &Path, ext: &str| std::fs::read(d.join(format!("{stem}.{ext}"))).unwrap();
        assert_eq!(
            read(a.path(), "csv"),
            read(b.path(), "csv"),
            "{file}: CSV differs between runs"
        );
        let ja: Value = serde_json::from_slice(&read(a.path(), "report.json")).unwrap();
        let jb: Value = serde_json::from_slice(&read(b.path(), "report.json")).unwrap();
        assert_eq!(
            hdw_forge::report::render_json(&strip(ja)),
            hdw_forge::report::render_json(&strip(jb)),
            "{file}: report differs between runs"
        );
    }
}

#[test]
fn report_commands_are_deterministic() {
    for (cmd, file) in [
        ("derive", "wave.hdw"),
        ("check", "oscillator.hdw"),
        ("legendre", "degenerate.hdw"),
    ] {
        let (_, a) = run_json(cmd, file, &[]);
        let (_, b) = run_json(cmd, file, &[]);
        assert_eq!(
            hdw_forge::report::render_json(&strip(a)),
            hdw_forge::report::render_json(&strip(b)),
            "{cmd} {file}"
        );
    }
}

#[test]
fn exit_status_contract() {
    let dir = tempfile::tempdir().unwrap();
    let inject = dir.path().join("inject.json");
    std::fs::write(&inject, r#"{"factor": 1, "coord": "y1", "delta": "1"}"#).unwrap();
    let osc = model("oscillator.hdw");
    let osc = osc.to_str().unwrap();

    let o = hdw(&["check", osc, "--debug-inject", inject.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "perturbed field must fail the checks");
    let o = hdw(&["derive", model("degenerate.hdw").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("degenerate"), "{}", stderr(&o));
    let o = hdw(&["legendre", osc]);
    assert_eq!(code(&o), 2);
    let o = hdw(&["check", dir.path().join("missing.hdw").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = hdw(&["frobnicate", osc]);
    assert_eq!(code(&o), 2);
    let o = hdw(&[
        "solve",
        model("wave.hdw").to_str().unwrap(),
        "--grid",
        "0x200",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "zero time steps is an input error");
}

#[test]
fn parse_errors_are_positional_with_suggestions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.hdw");
    std::fs::write(&bad, "[bundle]\nm = 1\nn = 1\n\n[hamiltonian]\nh = p2_1^2/2 + y1\n").unwrap();
    let o = hdw(&["derive", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("bad.hdw:6:5"), "{err}");
    assert!(err.contains("`p1_1`"), "{err}");

    std::fs::write(
        &bad,
        "[bundle]\nm = 1\nn = 1\n[hamiltonian]\nh = y1\n[lagrangian]\nL = v1_1\n",
    )
    .unwrap();
    let o = hdw(&["derive", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not both"));
}

#[test]
fn solver_abort_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.hdw");
    std::fs::write(
        &m,
        "[bundle]\nm = 1\nn = 1\n[hamiltonian]\nh = p1_1*log(y1)\n[solve]\nkind = ode\nt0 = 0\nt1 = 1\nsteps = 10\ninit.y1 = -1\ninit.p1_1 = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = hdw(&["solve", m.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("aborted"), "{}", stderr(&o));
    let left = std::fs::read_dir(&out).map(|d| d.count()).unwrap_or(0);
    assert_eq!(left, 0, "no partial output");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hdw-forge"))
        .args(["solve", model("oscillator.hdw").to_str().unwrap()])
        .env("HDW_FORGE_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("oscillator.csv").exists());
    assert!(dir.path().join("oscillator.report.json").exists());
}

#[test]
fn compare_round_trip_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let osc = model("oscillator.hdw");
    let o = hdw(&["solve", osc.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let grid = dir.path().join("oscillator.csv");
    let o = hdw(&["compare", osc.to_str().unwrap(), "--against", grid.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    // A different step makes a different grid.
    let o = hdw(&[
        "compare",
        osc.to_str().unwrap(),
        "--against",
        grid.to_str().unwrap(),
        "--dt",
        "0.02",
    ]);
    assert_eq!(code(&o), 1);
    let csv = std::fs::read_to_string(&grid).unwrap();
    std::fs::write(&grid, csv.replacen("0.0,1.0,0.0,-0.5", "0.0,1.001,0.0,-0.5", 1)).unwrap();
    let o = hdw(&["compare", osc.to_str().unwrap(), "--against", grid.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    std::fs::write(&grid, "t,y1\n0,zz\n").unwrap();
    let o = hdw(&["compare", osc.to_str().unwrap(), "--against", grid.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_reuses_the_stored_discretization() {
    let dir = tempfile::tempdir().unwrap();
    let wave = model("wave.hdw");
    let o = hdw(&[
        "solve",
        wave.to_str().unwrap(),
        "--grid",
        "40x60",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let grid = dir.path().join("wave.csv");
    let o = hdw(&["compare", wave.to_str().unwrap(), "--against", grid.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = hdw(&[
        "compare",
        wave.to_str().unwrap(),
        "--against",
        grid.to_str().unwrap(),
        "--grid",
        "40x50",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn user_gauge_keeps_residuals_and_reports_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("gauge.hdw");
    std::fs::write(&g, "[gauge]\nG[1][1][2] = y1*p1_1\n").unwrap();
    let (c, v) = run_json("check", "wave.hdw", &["--gauge", g.to_str().unwrap()]);
    assert_eq!(c, 0);
    let checks = v["checks"].as_array().unwrap();
    let curv = checks.iter().find(|c| c["name"] == "curvature_1_2").unwrap();
    assert_eq!(curv["status"], "note");
    assert!(checks
        .iter()
        .filter(|c| c["diagnostic"] == false)
        .all(|c| c["passed"] == true));
    assert_eq!(v["gauge"]["entries"]["G[1][1][2]"], "y1*p1_1");
}

#[test]
fn rendered_equations_reparse() {
    for file in ["oscillator.hdw", "wave.hdw"] {
        let (_, v) = run_json("derive", file, &[]);
        let chart = geometry_chart(
            v["model"]["m"].as_u64().unwrap() as usize,
            v["model"]["n"].as_u64().unwrap() as usize,
        );
        let ext = Scope::new(chart, hdw_forge_core::geometry::Bundle::Extended);
        let second = Scope::second_jet(chart);
        let mut seen = 0;
        for group in ["F", "G", "g"] {
            for eq in v["tables"][group].as_array().unwrap() {
                parse_expr(eq["rhs"].as_str().unwrap(), &ext).unwrap_or_else(|e| panic!("{file} {eq}: {e:?}"));
                seen += 1;
            }
        }
        for group in ["system", "momentum_components"] {
            for eq in v["equations"][group].as_array().unwrap() {
                parse_expr(eq["rhs"].as_str().unwrap(), &ext).unwrap();
                seen += 1;
            }
        }
        for eq in v["equations"]["second_order"].as_array().unwrap() {
            parse_expr(eq["rhs"].as_str().unwrap(), &second).unwrap();
            seen += 1;
        }
        assert!(seen >= 6);
    }
}

#[test]
fn output_formats() {
    let osc = model("oscillator.hdw");
    let o = hdw(&["derive", osc.to_str().unwrap(), "--format", "latex"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.contains("\\frac{\\partial y^{1}}{\\partial x^{1}} = p^{1}_{1}"),
        "{text}"
    );
    let o = hdw(&["check", osc.to_str().unwrap(), "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.starts_with("name,status,method,max_abs_residual,residual\n"),
        "{text}"
    );
    let o = hdw(&["derive", osc.to_str().unwrap()]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.contains("dy1/dx1 = p1_1") && text.contains("dp1_1/dx1 = -y1") && text.contains("dpe/dx1 = 0"),
        "{text}"
    );
}
