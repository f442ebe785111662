use hdw_forge_core::hdw::{derive_extended, dof_count, GaugeChoice};
use hdw_forge_core::legendre::second_order_form;
use hdw_forge_core::symbolic::{simplify, CoordId};
use serde_json::json;

use super::{input, Options, Outcome, Session};
use crate::error::CliError;
use crate::report::{equations_json, Equation};

fn partial(num: &str, num_latex: &str, nu: usize) -> (String, String) {
    (
        format!("d{num}/dx{nu}"),
        format!("\\frac{{\\partial {num_latex}}}{{\\partial x^{{{nu}}}}}"),
    )
}

/// Coefficient tables `(F, G, g)` of the extended field.
fn tables(x: &hdw_forge_core::hdw::HdwField) -> (Vec<Equation>, Vec<Equation>, Vec<Equation>) {
    let f = x
        .fiber()
        .iter()
        .map(|(&(a, nu), e)| Equation::new(format!("F[{a}][{nu}]"), format!("F^{{{a}}}_{{{nu}}}"), simplify(e)))
        .collect();
    let g = x
        .momentum()
        .iter()
        .map(|(&(a, rho, nu), e)| {
            Equation::new(
                format!("G[{a}][{rho}][{nu}]"),
                format!("G^{{{rho}}}_{{{a}{nu}}}"),
                simplify(e),
            )
        })
        .collect();
    let energy = x
        .energy()
        .iter()
        .enumerate()
        .map(|(i, e)| Equation::new(format!("g[{}]", i + 1), format!("g_{{{}}}", i + 1), simplify(e)))
        .collect();
    (f, g, energy)
}

pub fn derive(s: &Session, _opts: &Options) -> Result<Outcome, CliError> {
    let hm = s.hamiltonian()?;
    let chart = hm.chart();
    let (m, n) = (chart.m(), chart.n());
    let x = derive_extended(hm, &s.gauge).map_err(input)?;
    let (f_table, g_table, energy_table) = tables(&x);

    let mut system = Vec::new();
    for a in 1..=n {
        for nu in 1..=m {
            let (lhs, latex) = partial(&format!("y{a}"), &format!("y^{{{a}}}"), nu);
            system.push(Equation::new(lhs, latex, simplify(&x.fiber()[&(a, nu)])));
        }
    }
    for a in 1..=n {
        let lhs: Vec<String> = (1..=m).map(|nu| format!("dp{a}_{nu}/dx{nu}")).collect();
        let latex = if m == 1 {
            format!("\\frac{{\\partial p^{{1}}_{{{a}}}}}{{\\partial x^{{1}}}}")
        } else {
            format!("\\sum_{{\\nu}} \\frac{{\\partial p^{{\\nu}}_{{{a}}}}}{{\\partial x^{{\\nu}}}}")
        };
        system.push(Equation::new(
            lhs.join(" + "),
            latex,
            simplify(&-hm.h().diff(CoordId::y(a))),
        ));
    }
    for (nu, g) in x.energy().iter().enumerate() {
        let (lhs, latex) = partial("pe", "p", nu + 1);
        system.push(Equation::new(lhs, latex, simplify(g)));
    }
    let gauge_eqs: Vec<Equation> = x
        .momentum()
        .iter()
        .map(|(&(a, rho, nu), e)| {
            let (lhs, latex) = partial(&format!("p{a}_{rho}"), &format!("p^{{{rho}}}_{{{a}}}"), nu);
            Equation::new(lhs, latex, simplify(e))
        })
        .collect();
    let second: Option<Vec<Equation>> =
        second_order_form(hm).map(|eqs| eqs.into_iter().map(|e| Equation::new("0", "0", simplify(&e))).collect());
    let free = GaugeChoice::free_keys(chart);
    let dof = dof_count(chart);

    let mut report = s.report("derive");
    report.set(
        "tables",
        json!({
            "F": equations_json(&f_table),
            "G": equations_json(&g_table),
            "g": equations_json(&energy_table),
        }),
    );
    report.set(
        "equations",
        json!({
            "system": equations_json(&system),
            "momentum_components": equations_json(&gauge_eqs),
            "second_order": second.as_deref().map(equations_json),
        }),
    );
    report.set(
        "dof",
        json!({
            "count": dof,
            "free_entries": free.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
        }),
    );

    let mut out = Outcome::new(report);
    out.text.push(s.header_line());
    let section = |title: &str, eqs: &[Equation], out: &mut Outcome| {
        out.text.push(format!("{title}:"));
        out.text.extend(eqs.iter().map(|e| format!("  {}", e.text())));
        out.latex.push(format!("% {title}"));
        out.latex.extend(eqs.iter().map(Equation::latex));
    };
    section("field equations", &system, &mut out);
    section("momentum components (gauge dependent)", &gauge_eqs, &mut out);
    section("coefficients F", &f_table, &mut out);
    section("coefficients G", &g_table, &mut out);
    section("coefficients g", &energy_table, &mut out);
    match &second {
        Some(eqs) => section("second-order form", eqs, &mut out),
        None => out
            .text
            .push("second-order form: not available (momentum Hessian not constant)".into()),
    }
    out.text.push(format!("free gauge functions: {dof}"));

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "lhs", "rhs"]).expect("in-memory write");
    let groups: [(&str, &[Equation]); 5] = [
        ("system", &system),
        ("momentum", &gauge_eqs),
        ("F", &f_table),
        ("G", &g_table),
        ("g", &energy_table),
    ];
    for (group, eqs) in groups {
        for e in eqs {
            w.write_record([group, &e.lhs, &e.rhs.to_string()])
                .expect("in-memory write");
        }
    }
    for e in second.iter().flatten() {
        w.write_record(["second_order", &e.lhs, &e.rhs.to_string()])
            .expect("in-memory write");
    }
    out.csv = String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8");
    Ok(out)
}
