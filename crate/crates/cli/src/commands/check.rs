use hdw_forge_core::geometry::{build_omega, extended_alpha, hamilton_cartan, Bundle};
use hdw_forge_core::hdw::corpus::gauge_corpus;
use hdw_forge_core::hdw::{
    connection_equation_check, curvature, derive_extended, derive_restricted, dof_count, mu_vertical_pairing,
    residual_extended, residual_restricted, tangency_check, transversality, verify_form_zero, verify_zero, CheckMethod,
    GaugeChoice, HdwField, ZeroVerdict,
};
use hdw_forge_core::symbolic::{simplify, CoordId, Expr};
use serde_json::json;

use super::{input, load_injection, Options, Outcome, Session};
use crate::error::CliError;
use crate::report::CheckOutcome;

/// Random gauges tried on top of the selected one.
const RANDOM_GAUGES: usize = 3;

/// The extended field projects onto the restricted one: every component
/// outside `pe` and the overall scale agree.
fn projection_residuals(ext: &HdwField, res: &HdwField) -> Vec<Expr> {
    let (me, mr) = (ext.multivector(), res.multivector());
    let mut out = vec![simplify(&(me.scale() - mr.scale()))];
    let chart = ext.chart();
    for nu in 1..=chart.m() {
        for c in chart.coords(Bundle::Restricted) {
            out.push(simplify(&(me.factor(nu).component(c) - mr.factor(nu).component(c))));
        }
    }
    out
}

fn push(checks: &mut Vec<CheckOutcome>, name: &str, statement: &str, v: ZeroVerdict) {
    checks.push(CheckOutcome::from_verdict(name, statement, &v));
}

fn one_minus(e: &Expr) -> Expr {
    simplify(&(e - Expr::one()))
}

pub fn check(s: &Session, opts: &Options) -> Result<Outcome, CliError> {
    let hm = s.hamiltonian()?;
    let chart = hm.chart();
    let (m, n) = (chart.m(), chart.n());
    let seed = opts.seed;
    let mut res = derive_restricted(hm, &s.gauge).map_err(input)?;
    let mut ext = derive_extended(hm, &s.gauge).map_err(input)?;
    let injection = load_injection(opts, &s.model)?;
    if let Some(inj) = &injection {
        res = inj.apply(&res)?;
        ext = inj.apply(&ext)?;
    }
    let (_, omega_h) = hamilton_cartan(chart, hm.h()).map_err(input)?;
    let omega = build_omega(chart);
    let (big_h, alpha) = extended_alpha(chart, hm.h()).map_err(input)?;
    let fail = |e: hdw_forge_core::hdw::HdwError| CliError::Failure(e.to_string());

    let mut checks = Vec::new();
    push(
        &mut checks,
        "restricted_field_equation",
        "the restricted field solves i(X_h)Omega_h = 0",
        verify_form_zero(&residual_restricted(&res, &omega_h).map_err(fail)?, seed),
    );
    push(
        &mut checks,
        "extended_field_equation",
        "the extended field solves i(X)Omega = (-1)^(m+1) dH",
        verify_form_zero(&residual_extended(&ext, &omega, &alpha).map_err(fail)?, seed),
    );
    push(
        &mut checks,
        "transversality",
        "both fields are normalized: i(X)(d^m x) = 1",
        verify_zero(
            &[one_minus(&transversality(&res)), one_minus(&transversality(&ext))],
            seed,
        ),
    );
    push(
        &mut checks,
        "dH_vertical_pairing",
        "dH pairs to 1 with the vertical direction d/dpe",
        verify_zero(&[one_minus(&mu_vertical_pairing(&alpha).map_err(fail)?)], seed),
    );
    push(
        &mut checks,
        "level_set_tangency",
        "every factor of the extended field annihilates H, so the field is tangent to H = const",
        verify_zero(&tangency_check(&ext, &big_h).map_err(fail)?, seed),
    );
    push(
        &mut checks,
        "connection_equation",
        "sum over nu of dx^nu ^ i(X_nu)Omega_h equals (m-1)Omega_h",
        verify_form_zero(&connection_equation_check(&res, &omega_h).map_err(fail)?, seed),
    );
    push(
        &mut checks,
        "extended_projects_to_restricted",
        "dropping the pe components of the extended field gives the restricted field",
        verify_zero(&projection_residuals(&ext, &res), seed),
    );
    let fiber: Vec<Expr> = (1..=n)
        .flat_map(|a| (1..=m).map(move |nu| (a, nu)))
        .map(|(a, nu)| simplify(&(&res.fiber()[&(a, nu)] - hm.h().diff(CoordId::p(a, nu)))))
        .collect();
    push(
        &mut checks,
        "fiber_coefficients",
        "F^A_nu = dh/dp^nu_A",
        verify_zero(&fiber, seed),
    );
    let trace: Vec<Expr> = (1..=n)
        .map(|a| {
            let sum = Expr::sum((1..=m).map(|nu| res.momentum()[&(a, nu, nu)].clone()).collect());
            simplify(&(sum + hm.h().diff(CoordId::y(a))))
        })
        .collect();
    push(
        &mut checks,
        "trace_equation",
        "sum over nu of G^nu_(A nu) = -dh/dy^A",
        verify_zero(&trace, seed),
    );
    let free = GaugeChoice::free_keys(chart).len();
    let dof = dof_count(chart);
    checks.push(CheckOutcome::exact(
        "dof_count",
        "the general solution has n(m^2-1) free functions, one per free gauge entry",
        free == dof,
        format!("free entries {free}, n(m^2-1) = {dof}"),
    ));

    let mut worst: Option<ZeroVerdict> = None;
    for (i, g) in gauge_corpus(chart, seed, RANDOM_GAUGES).into_iter().enumerate() {
        let r = derive_restricted(hm, &g).map_err(input)?;
        let e = derive_extended(hm, &g).map_err(input)?;
        let mut forms = residual_restricted(&r, &omega_h)
            .map_err(fail)?
            .terms()
            .map(|(_, c)| c.clone())
            .collect::<Vec<_>>();
        forms.extend(
            residual_extended(&e, &omega, &alpha)
                .map_err(fail)?
                .terms()
                .map(|(_, c)| c.clone()),
        );
        let v = verify_zero(&forms, seed.wrapping_add(i as u64 + 1));
        if worst
            .as_ref()
            .is_none_or(|w| w.holds && (!v.holds || v.max_abs > w.max_abs))
        {
            worst = Some(v);
        }
    }
    let worst = worst.unwrap_or(ZeroVerdict {
        holds: true,
        method: CheckMethod::Structural,
        max_abs: 0.0,
        leftovers: Vec::new(),
    });
    push(
        &mut checks,
        "random_gauges",
        "both field equations hold for seeded random free gauge functions",
        worst,
    );

    let curv = curvature(&res);
    for entry in &curv {
        let comps: Vec<Expr> = entry.components.values().cloned().collect();
        let mut outcome = CheckOutcome::from_verdict(
            &format!("curvature_{}_{}", entry.nu, entry.eta),
            &format!(
                "the bracket [X_{}, X_{}] vanishes (integrable connection)",
                entry.nu, entry.eta
            ),
            &verify_zero(&comps, seed),
        )
        .as_diagnostic();
        if !outcome.passed {
            outcome.residual = entry
                .components
                .iter()
                .filter(|(_, e)| !hdw_forge_core::symbolic::is_zero(e))
                .map(|(c, e)| format!("d/d{c}: {e}"))
                .collect::<Vec<_>>()
                .join("; ");
        }
        checks.push(outcome);
    }

    let mut report = s.report("check");
    report.set("seed", json!(seed));
    report.set("random_gauges", json!(RANDOM_GAUGES));
    if let Some(inj) = &injection {
        report.set(
            "injection",
            json!({
                "factor": inj.factor,
                "coord": inj.coord.map(|c| c.name()),
                "delta": inj.delta.to_string(),
                "scale": inj.scale.as_ref().map(|e| e.to_string()),
            }),
        );
    }
    report.checks = checks;

    let mut out = Outcome::new(report);
    out.text.push(out_header(s, injection.is_some()));
    out.latex.push("% checks".into());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "status", "method", "max_abs_residual", "residual"])
        .expect("in-memory write");
    for c in &out.report.checks {
        out.text.push(format!(
            "  [{}] {:<32} {} ({})",
            c.status().to_uppercase(),
            c.name,
            c.statement,
            c.method.label()
        ));
        if !c.passed {
            out.text.push(format!("         residual: {}", c.residual));
        }
        out.latex.push(format!(
            "\\text{{{}}}: \\text{{{}}}",
            c.name.replace('_', "\\_"),
            c.status()
        ));
        w.write_record([
            c.name.as_str(),
            c.status(),
            c.method.label(),
            &format!("{:?}", c.max_abs),
            c.residual.as_str(),
        ])
        .expect("in-memory write");
    }
    out.csv = String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8");
    let failed = out.report.checks.iter().filter(|c| !c.passed && !c.diagnostic).count();
    out.summary = Some(if failed == 0 {
        format!("{}: all checks passed", s.model.name)
    } else {
        format!("{}: {failed} check(s) failed", s.model.name)
    });
    Ok(out)
}

fn out_header(s: &Session, injected: bool) -> String {
    let mut line = s.header_line();
    if injected {
        line.push_str(" [field edited by --debug-inject]");
    }
    line
}
