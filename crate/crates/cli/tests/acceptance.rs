//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (`harness = false`).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use hdw_forge::expr_parse::{parse_expr, Scope};
use hdw_forge_core::geometry::{build_omega, extended_alpha, hamilton_cartan, Bundle, BundleChart};
use hdw_forge_core::hdw::corpus::{gauge_corpus, hamiltonian_corpus};
use hdw_forge_core::hdw::{
    connection_equation_check, derive_extended, derive_restricted, dof_count, mu_vertical_pairing, residual_extended,
    residual_restricted, tangency_check, transversality, GaugeChoice, HamiltonianModel, Provenance,
};
use hdw_forge_core::legendre::{
    degenerate_image, hamiltonian_from_lagrangian, legendre_maps, legendre_round_trip, rank_diagnostics,
    LagrangianModel, Regularity, Submanifold,
};
use hdw_forge_core::solver::{
    conservation_diagnostics, field_energy_diagnostics, max_discrepancy, project_extended, solve_field_1p1, solve_ode,
    PeriodicAxis, SectionGrid, TimeSpan,
};
use hdw_forge_core::symbolic::{equivalent, fd_check, is_zero, Assignment, CoordId, Expr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const PAIRS: [(usize, usize); 5] = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn chart(m: usize, n: usize) -> BundleChart {
    BundleChart::new(m, n).unwrap()
}

fn var(c: CoordId) -> Expr {
    Expr::var(c)
}

fn parse(text: &str, c: BundleChart, b: Bundle) -> Expr {
    parse_expr(text, &Scope::new(c, b)).unwrap_or_else(|e| panic!("{text}: {e:?}"))
}

fn ham(c: BundleChart, h: Expr) -> HamiltonianModel {
    HamiltonianModel::new(c, h, Provenance::UserGiven).unwrap()
}

fn ac1_residual_suite() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut total = 0;
    for (m, n) in PAIRS {
        let c = chart(m, n);
        let hs = hamiltonian_corpus(c, 11 + (10 * m + n) as u64, 20);
        let gs = gauge_corpus(c, 97 + (10 * m + n) as u64, 20);
        let omega = build_omega(c);
        for (i, (h, g)) in hs.iter().zip(&gs).enumerate() {
            total += 1;
            let model = ham(c, h.clone());
            let res = derive_restricted(&model, g).unwrap();
            let ext = derive_extended(&model, g).unwrap();
            let (_, omega_h) = hamilton_cartan(c, h).unwrap();
            let (big_h, alpha) = extended_alpha(c, h).unwrap();
            let ok = residual_restricted(&res, &omega_h).unwrap().is_structurally_zero()
                && residual_extended(&ext, &omega, &alpha).unwrap().is_structurally_zero()
                && tangency_check(&ext, &big_h).unwrap().iter().all(is_zero)
                && connection_equation_check(&res, &omega_h)
                    .unwrap()
                    .is_structurally_zero()
                && mu_vertical_pairing(&alpha).unwrap() == Expr::one()
                && transversality(&res) == Expr::one()
                && transversality(&ext) == Expr::one();
            if !ok {
                failures.push(format!("(m={m},n={n})#{i}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        failures.is_empty() && secs < 60.0,
        format!(
            "{total} random models, {} failures{}, {secs:.2} s (limit 60 s)",
            failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(" {failures:?}")
            }
        ),
    )
}

fn ac2_dof() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (m, n) in PAIRS {
        let c = chart(m, n);
        let free = GaugeChoice::free_keys(c).len();
        let want = n * (m * m - 1);
        ok &= free == want && dof_count(c) == want;
        parts.push(format!("({m},{n}):{free}"));
    }
    verdict(ok, format!("free entries {} match n(m^2-1)", parts.join(" ")))
}

fn ac3_reproduction() -> Verdict {
    let c = chart(1, 1);
    let (t, q, p) = (CoordId::x(1), CoordId::y(1), CoordId::p(1, 1));
    let samples = [
        "(p1_1^2 + y1^2)/2",
        "x1*y1^2*p1_1 + sin(x1)*p1_1^3 - exp(y1)",
        "p1_1^2/(2*(1 + y1^2)) + x1^2*y1",
        "log(2 + x1^2)*p1_1*y1 - cos(y1*x1)",
    ];
    for text in samples {
        let h = parse(text, c, Bundle::Restricted);
        let model = ham(c, h.clone());
        let ext = derive_extended(&model, &GaugeChoice::equal_split()).unwrap();
        let res = derive_restricted(&model, &GaugeChoice::equal_split()).unwrap();
        let x = ext.multivector().factor(1);
        let xr = res.multivector().factor(1);
        let expected = [
            (t, Expr::one()),
            (q, h.diff(p)),
            (p, -h.diff(q)),
            (CoordId::pe(), -h.diff(t)),
        ];
        for (coord, want) in &expected {
            if !equivalent(&x.component(*coord), want) {
                return verdict(false, format!("extended {coord} component differs for h = {text}"));
            }
            if *coord != CoordId::pe() && !equivalent(&xr.component(*coord), want) {
                return verdict(false, format!("restricted {coord} component differs for h = {text}"));
            }
        }
        if xr.components().len() != 3 || !ext.multivector().scale().is_literal_one() {
            return verdict(false, format!("unexpected extra components for h = {text}"));
        }
    }
    verdict(
        true,
        format!("4 coefficient expressions matched on {} Hamiltonians", samples.len()),
    )
}

fn oscillator() -> (BundleChart, HamiltonianModel) {
    let c = chart(1, 1);
    (c, ham(c, parse("(p1_1^2 + y1^2)/2", c, Bundle::Restricted)))
}

fn init(pairs: &[(CoordId, f64)]) -> BTreeMap<CoordId, f64> {
    pairs.iter().copied().collect()
}

fn last(grid: &SectionGrid, c: CoordId) -> f64 {
    *grid.field(c).unwrap().last().unwrap()
}

fn oscillator_error(steps: usize) -> f64 {
    let (_, model) = oscillator();
    let x = derive_restricted(&model, &GaugeChoice::equal_split()).unwrap();
    let g = solve_ode(
        &x,
        &init(&[(CoordId::y(1), 1.0), (CoordId::p(1, 1), 0.0)]),
        TimeSpan::new(0.0, 10.0, steps).unwrap(),
    )
    .unwrap();
    (last(&g, CoordId::y(1)) - 10f64.cos())
        .abs()
        .max((last(&g, CoordId::p(1, 1)) + 10f64.sin()).abs())
}

fn ac4_oscillator() -> Verdict {
    let start = Instant::now();
    let (_, model) = oscillator();
    let span = TimeSpan::with_max_step(0.0, 10.0, 1e-3).unwrap();
    let res = derive_restricted(&model, &GaugeChoice::equal_split()).unwrap();
    let g = solve_ode(&res, &init(&[(CoordId::y(1), 1.0), (CoordId::p(1, 1), 0.0)]), span).unwrap();
    let eq = (last(&g, CoordId::y(1)) - 10f64.cos()).abs();
    let ep = (last(&g, CoordId::p(1, 1)) + 10f64.sin()).abs();
    let ext = derive_extended(&model, &GaugeChoice::equal_split()).unwrap();
    let ge = solve_ode(
        &ext,
        &init(&[(CoordId::y(1), 1.0), (CoordId::p(1, 1), 0.0), (CoordId::pe(), -0.5)]),
        span,
    )
    .unwrap();
    let pe = ge.field(CoordId::pe()).unwrap();
    let drift = pe.iter().map(|v| (v - pe[0]).abs()).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        eq < 1e-6 && ep < 1e-6 && drift < 1e-9 && secs < 1.0,
        format!("|q-cos10| = {eq:.2e}, |p+sin10| = {ep:.2e}, pe drift {drift:.2e}, {secs:.3} s"),
    )
}

fn ac5_energy_identity() -> Verdict {
    let start = Instant::now();
    let c = chart(1, 1);
    let model = ham(c, parse("p1_1^2/2 + y1^2*(1 + x1/10)/2", c, Bundle::Restricted));
    let ext = derive_extended(&model, &GaugeChoice::equal_split()).unwrap();
    let span = TimeSpan::with_max_step(0.0, 10.0, 1e-3).unwrap();
    let g = solve_ode(
        &ext,
        &init(&[(CoordId::y(1), 1.0), (CoordId::p(1, 1), 0.0), (CoordId::pe(), -0.5)]),
        span,
    )
    .unwrap();
    let (big_h, _) = extended_alpha(c, model.h()).unwrap();
    let rep = conservation_diagnostics(&g, &big_h).unwrap();
    let residual = rep.energy_residual.unwrap_or(f64::INFINITY);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        residual < 1e-6 && rep.drift < 1e-7 && secs < 1.0,
        format!(
            "dpe/dt + dh/dt residual {residual:.2e}, H drift {:.2e}, {secs:.3} s",
            rep.drift
        ),
    )
}

fn ac6_projection() -> Verdict {
    let (_, model) = oscillator();
    let span = TimeSpan::with_max_step(0.0, 10.0, 1e-3).unwrap();
    let ext = derive_extended(&model, &GaugeChoice::equal_split()).unwrap();
    let res = derive_restricted(&model, &GaugeChoice::equal_split()).unwrap();
    let ge = solve_ode(
        &ext,
        &init(&[(CoordId::y(1), 1.0), (CoordId::p(1, 1), 0.0), (CoordId::pe(), -0.5)]),
        span,
    )
    .unwrap();
    let gr = solve_ode(&res, &init(&[(CoordId::y(1), 1.0), (CoordId::p(1, 1), 0.0)]), span).unwrap();
    let d = max_discrepancy(&project_extended(&ge).unwrap(), &gr).unwrap();
    verdict(d < 1e-9, format!("max discrepancy {d:.2e}"))
}

fn ac7_wave() -> Verdict {
    let start = Instant::now();
    let c = chart(2, 1);
    let lag = parse("(v1_1^2 - v1_2^2)/2", c, Bundle::Jet);
    let res = legendre_maps(&LagrangianModel::new(c, lag).unwrap());
    let model = hamiltonian_from_lagrangian(&res).unwrap();
    let x = derive_restricted(&model, &GaugeChoice::equal_split()).unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    let axis = PeriodicAxis::new(0.0, tau, 200).unwrap();
    let span = TimeSpan::new(0.0, tau, 200).unwrap();
    let y0: Vec<f64> = (0..200).map(|i| axis.x(i).sin()).collect();
    let g = solve_field_1p1(&x, &y0, &vec![0.0; 200], span, axis).unwrap();
    let mut err: f64 = 0.0;
    for k in 0..=span.steps {
        let y = g.slice(CoordId::y(1), k).unwrap();
        for (i, v) in y.iter().enumerate() {
            err = err.max((v - span.time(k).cos() * axis.x(i).sin()).abs());
        }
    }
    let rep = field_energy_diagnostics(&g, model.h()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        err < 1e-3 && rep.relative_drift < 1e-3 && secs < 30.0,
        format!(
            "200x200 max error {err:.2e}, relative energy drift {:.2e}, {secs:.2} s",
            rep.relative_drift
        ),
    )
}

fn ac8_round_trip() -> Verdict {
    let cases = [
        (1, 1, "v1_1^2/2 - y1^2/2"),
        (1, 2, "(v1_1^2 + v2_1^2)/2 - y1*y2 + x1*y1"),
        (2, 1, "(v1_1^2 - v1_2^2)/2 - y1^2/2"),
        (2, 2, "(v1_1^2 - v1_2^2 + v2_1^2 - v2_2^2)/2 + v1_1*v2_1/2 - y1*y2"),
        (3, 1, "(v1_1^2 - v1_2^2 - v1_3^2)/2 + y1*v1_2 - y1^3/3"),
    ];
    let mut bad = Vec::new();
    for (m, n, text) in cases {
        let c = chart(m, n);
        let res = legendre_maps(&LagrangianModel::new(c, parse(text, c, Bundle::Jet)).unwrap());
        let ok = res.regularity == Regularity::HyperRegularClosedForm
            && legendre_round_trip(&res).map(|rt| rt.holds()).unwrap_or(false);
        if !ok {
            bad.push(text);
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{} of {} Lagrangians round-trip{}",
            cases.len() - bad.len(),
            cases.len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; failed {bad:?}")
            }
        ),
    )
}

/// Random expression over the given coordinates with values kept in a
/// range where every function is smooth.
fn random_expr(rng: &mut ChaCha8Rng, coords: &[CoordId], depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.7) {
            var(coords[rng.gen_range(0..coords.len())])
        } else {
            Expr::ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4))
        };
    }
    let a = random_expr(rng, coords, depth - 1);
    match rng.gen_range(0..9) {
        0 => a + random_expr(rng, coords, depth - 1),
        1 => a - random_expr(rng, coords, depth - 1),
        2 | 3 => a * random_expr(rng, coords, depth - 1),
        4 => a / (Expr::int(2) + random_expr(rng, coords, depth - 1).powi(2)),
        5 => a.powi(rng.gen_range(2..=3)),
        6 => a.sin(),
        7 => (a / Expr::int(3)).exp(),
        _ => (Expr::one() + a.powi(2)).log(),
    }
}

fn ac9_fd_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let c = chart(2, 2);
    let coords = c.coords(Bundle::Extended);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let e = random_expr(&mut rng, &coords, 4);
        let point: Assignment = coords.iter().map(|c| (*c, rng.gen_range(0.3..1.7))).collect();
        let wrt = coords[rng.gen_range(0..coords.len())];
        let r = fd_check(&e, wrt, &point, 1e-5).unwrap();
        worst = worst.max(r.relerr);
    }
    verdict(worst < 1e-6, format!("100 pairs, worst relerr {worst:.2e}"))
}

fn samples(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    (0..10)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.2..1.2)).collect())
        .collect()
}

fn ac10_degeneracy() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let c = chart(1, 1);
    let res = legendre_maps(&LagrangianModel::new(c, parse("v1_1", c, Bundle::Jet)).unwrap());
    let zero_hessian = res.hessian.iter().flatten().all(is_zero);
    let sub = degenerate_image(&res).unwrap();
    let deg = rank_diagnostics(&sub, &samples(&mut rng, sub.dim())).unwrap();
    let deg_min = deg.iter().map(|d| d.vertical_kernel.min(d.full_kernel)).min().unwrap();
    let (_, osc) = oscillator();
    let id = Submanifold::identity(c, osc.h()).unwrap();
    let reg = rank_diagnostics(&id, &samples(&mut rng, id.dim())).unwrap();
    let reg_vertical = reg.iter().map(|d| d.vertical_kernel).max().unwrap();
    let reg_full = reg.iter().map(|d| d.full_kernel).max().unwrap();
    verdict(
        zero_hessian && res.regularity == Regularity::Degenerate && deg.len() == 10 && deg_min >= 1 && reg_vertical == 0,
        format!(
            "L = v1_1: zero Hessian {zero_hessian}, kernel >= {deg_min} at {} samples; oscillator vertical kernel {reg_vertical} (full kernel {reg_full}, the time direction)",
            deg.len()
        ),
    )
}

fn ac11_rk4_order() -> Verdict {
    let (e1, e2) = (oscillator_error(10_000), oscillator_error(20_000));
    let fine = e1 / e2;
    let (c1, c2) = (oscillator_error(100), oscillator_error(200));
    let coarse = c1 / c2;
    let pass = (14.0..=18.0).contains(&coarse);
    verdict(
        pass,
        format!(
            "error ratio {coarse:.2} for dt 0.1 -> 0.05; at dt 1e-3 -> 5e-4 the ratio is {fine:.2} ({e1:.1e} vs {e2:.1e}, at rounding level)"
        ),
    )
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_hdw-forge"))
        .args(args)
        .env_remove("HDW_FORGE_OUT")
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), o.stdout)
}

fn strip(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap_or(Value::Null);
    if let Value::Object(m) = &mut v {
        m.remove("generated_unix");
    }
    v
}

fn close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            (x - y).abs() <= 1e-9 * x.abs().max(y.abs()) || (x.abs() < 1e-13 && y.abs() < 1e-13)
        }
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q)),
        (Value::Object(x), Value::Object(y)) => x.keys().eq(y.keys()) && x.iter().all(|(k, v)| close(v, &y[k])),
        _ => a == b,
    }
}

fn ac12_cli_contract() -> Verdict {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let model = |f: &str| root.join("models").join(f).to_string_lossy().into_owned();
    let golden = |f: &str| -> Value {
        serde_json::from_str(&std::fs::read_to_string(root.join("tests/golden").join(f)).unwrap()).unwrap()
    };
    let mut problems = Vec::new();
    let runs = [
        ("derive", "oscillator"),
        ("check", "oscillator"),
        ("derive", "wave"),
        ("check", "wave"),
        ("legendre", "wave"),
        ("legendre", "degenerate"),
    ];
    for (cmd, stem) in runs {
        let m = model(&format!("{stem}.hdw"));
        let (c1, a) = cli(&[cmd, &m, "--format", "json"]);
        let (c2, b) = cli(&[cmd, &m, "--format", "json"]);
        if c1 != 0 || c2 != 0 {
            problems.push(format!("{cmd} {stem}: exit {c1}/{c2}"));
        }
        if strip(&a) != strip(&b) {
            problems.push(format!("{cmd} {stem}: not deterministic"));
        }
        if !close(&strip(&a), &golden(&format!("{stem}.{cmd}.json"))) {
            problems.push(format!("{cmd} {stem}: differs from golden"));
        }
    }
    for stem in ["oscillator", "wave"] {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            let (c, _) = cli(&[
                "solve",
                &model(&format!("{stem}.hdw")),
                "--out",
                d.path().to_str().unwrap(),
            ]);
            if c != 0 {
                problems.push(format!("solve {stem}: exit {c}"));
            }
        }
        let read =
            |i: usize, ext: &str| std::fs::read(dirs[i].path().join(format!("{stem}.{ext}"))).unwrap_or_default();
        if read(0, "csv") != read(1, "csv") || read(0, "csv").is_empty() {
            problems.push(format!("solve {stem}: CSV not byte-identical"));
        }
        let (r0, r1) = (strip(&read(0, "report.json")), strip(&read(1, "report.json")));
        if r0 != r1 {
            problems.push(format!("solve {stem}: report not deterministic"));
        }
        if !close(&r0, &golden(&format!("{stem}.solve.json"))) {
            problems.push(format!("solve {stem}: differs from golden"));
        }
    }
    let tmp = tempfile::tempdir().unwrap();
    let inject = tmp.path().join("inject.json");
    std::fs::write(&inject, r#"{"factor": 1, "coord": "y1", "delta": "1"}"#).unwrap();
    let expect_code = |args: &[&str], want: i32, problems: &mut Vec<String>| {
        let (c, _) = cli(args);
        if c != want {
            problems.push(format!("{args:?}: exit {c}, expected {want}"));
        }
    };
    expect_code(
        &[
            "check",
            &model("oscillator.hdw"),
            "--debug-inject",
            inject.to_str().unwrap(),
        ],
        1,
        &mut problems,
    );
    expect_code(&["derive", &model("degenerate.hdw")], 2, &mut problems);
    expect_code(
        &[
            "solve",
            &model("wave.hdw"),
            "--grid",
            "0x200",
            "--out",
            tmp.path().to_str().unwrap(),
        ],
        2,
        &mut problems,
    );
    expect_code(
        &["check", tmp.path().join("absent.hdw").to_str().unwrap()],
        2,
        &mut problems,
    );
    verdict(
        problems.is_empty(),
        if problems.is_empty() {
            "3 models: goldens match, byte-identical reruns, exit codes 0/1/2 as specified".to_string()
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 12] = [
        ("symbolic residual suite", ac1_residual_suite),
        ("degrees of freedom", ac2_dof),
        ("m=1 coefficient reproduction", ac3_reproduction),
        ("oscillator regression", ac4_oscillator),
        ("energy-drift identity", ac5_energy_identity),
        ("extended/restricted relation", ac6_projection),
        ("1+1 wave via Legendre pipeline", ac7_wave),
        ("Legendre round trip", ac8_round_trip),
        ("derivative validation", ac9_fd_check),
        ("degeneracy diagnostics", ac10_degeneracy),
        ("RK4 order", ac11_rk4_order),
        ("CLI determinism and exit status", ac12_cli_contract),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!(
            "[{}] AC{} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
