use hdw_forge_core::legendre::{
    degenerate_image, euler_lagrange, legendre_round_trip, rank_diagnostics, Regularity, Submanifold,
};
use hdw_forge_core::symbolic::{simplify, Expr};
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use super::{Options, Outcome, Session};
use crate::error::CliError;
use crate::model::{Embedding, Physics, SubmanifoldSpec};
use crate::report::{equations_json, CheckOutcome, Equation};

/// Default sample box for rank diagnostics, per parameter.
const SAMPLE_LOW: f64 = 0.2;
const SAMPLE_HIGH: f64 = 1.2;

fn samples(spec: Option<&SubmanifoldSpec>, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    if let Some(s) = spec.filter(|s| !s.samples.is_empty()) {
        return s.samples.clone();
    }
    let count = spec.map_or(10, |s| s.sample_count);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(SAMPLE_LOW..SAMPLE_HIGH)).collect())
        .collect()
}

/// The submanifold to examine: the one declared in the model, else the
/// momentum image for degenerate Lagrangians, else the whole bundle.
fn pick_submanifold(s: &Session) -> Result<Option<(String, Submanifold)>, CliError> {
    let chart = s.model.chart;
    let res = s.legendre.as_ref().expect("legendre session");
    let bad = |e: hdw_forge_core::legendre::LegendreError| CliError::Input(format!("{}: {e}", s.model.name));
    let declared = s.model.submanifold.as_ref().map(|sm| &sm.embedding);
    let chosen = match declared {
        Some(Embedding::Explicit { dim, images, h }) => Some((
            "explicit".to_string(),
            Submanifold::new(chart, *dim, images.clone(), h.clone()).map_err(bad)?,
        )),
        Some(Embedding::MomentumImage) => Some(("momentum-image".into(), degenerate_image(res).map_err(bad)?)),
        Some(Embedding::Identity) => Some((
            "identity".into(),
            Submanifold::identity(chart, s.hamiltonian()?.h()).map_err(bad)?,
        )),
        None if res.regularity == Regularity::Degenerate => degenerate_image(res)
            .ok()
            .map(|sub| ("momentum-image".to_string(), sub)),
        None => s
            .hamiltonian()
            .ok()
            .map(|hm| Submanifold::identity(chart, hm.h()).map(|sub| ("identity".to_string(), sub)))
            .transpose()
            .map_err(bad)?,
    };
    Ok(chosen)
}

pub fn legendre(s: &Session, opts: &Options) -> Result<Outcome, CliError> {
    if !matches!(s.model.physics, Physics::Lagrangian(_)) {
        return Err(CliError::Input(format!(
            "{}: `legendre` needs a `[lagrangian]` block",
            s.model.name
        )));
    }
    let res = s.legendre.as_ref().expect("lagrangian models carry a Legendre result");
    let momenta: Vec<Equation> = res
        .momentum
        .iter()
        .map(|(&(a, nu), e)| Equation::new(format!("p{a}_{nu}"), format!("p^{{{nu}}}_{{{a}}}"), simplify(e)))
        .collect();
    let energy = Equation::new("pe", "p", simplify(&res.extended));
    let hessian: Vec<Vec<String>> = res
        .hessian
        .iter()
        .map(|row| row.iter().map(|e| simplify(e).to_string()).collect())
        .collect();
    let el: Vec<Equation> = euler_lagrange(&res.model)
        .into_iter()
        .map(|e| Equation::new("0", "0", simplify(&e)))
        .collect();

    let mut checks = Vec::new();
    let mut round_trip = Value::Null;
    if res.hamiltonian.is_some() {
        let rt = legendre_round_trip(res).map_err(|e| CliError::Failure(e.to_string()))?;
        round_trip = json!({
            "holds": rt.holds(),
            "field_equations": rt.field_equations.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "velocity_mismatch": rt.velocity_mismatch.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        });
        let detail = if rt.holds() {
            "0".to_string()
        } else {
            rt.field_equations
                .iter()
                .zip(&rt.euler_lagrange)
                .map(|(f, e)| simplify(&(f - e)).to_string())
                .chain(rt.velocity_mismatch.iter().map(Expr::to_string))
                .collect::<Vec<_>>()
                .join("; ")
        };
        checks.push(CheckOutcome::exact(
            "legendre_round_trip",
            "field equations of the induced Hamiltonian, with momenta eliminated, equal the Euler-Lagrange equations",
            rt.holds(),
            detail,
        ));
    }

    let mut rank = Value::Null;
    let mut rank_lines = Vec::new();
    if let Some((label, sub)) = pick_submanifold(s)? {
        let pts = samples(s.model.submanifold.as_ref(), sub.dim(), opts.seed);
        let diag = rank_diagnostics(&sub, &pts).map_err(|e| CliError::Input(format!("{}: {e}", s.model.name)))?;
        let min_full = diag.iter().map(|d| d.full_kernel).min().unwrap_or(0);
        let min_vert = diag.iter().map(|d| d.vertical_kernel).min().unwrap_or(0);
        let max_vert = diag.iter().map(|d| d.vertical_kernel).max().unwrap_or(0);
        rank = json!({
            "embedding": label,
            "parameters": sub.dim(),
            "h": sub.hamiltonian().to_string(),
            "samples": diag.iter().map(|d| json!({
                "point": d.point,
                "full_kernel": d.full_kernel,
                "vertical_kernel": d.vertical_kernel,
            })).collect::<Vec<_>>(),
            "min_full_kernel": min_full,
            "min_vertical_kernel": min_vert,
            "max_vertical_kernel": max_vert,
        });
        rank_lines.push(format!(
            "rank diagnostics on the {label} embedding ({} samples): full kernel >= {min_full}, vertical kernel in [{min_vert}, {max_vert}]",
            diag.len()
        ));
        let nondegenerate = max_vert == 0;
        checks.push(
            CheckOutcome::exact(
                "vertical_nondegeneracy",
                "no vertical vector is annihilated by the pulled-back form at any sample",
                nondegenerate,
                format!("vertical kernel dimension in [{min_vert}, {max_vert}]"),
            )
            .as_diagnostic(),
        );
    }

    let mut report = s.report("legendre");
    report.set(
        "legendre",
        json!({
            "momenta": equations_json(&momenta),
            "energy": energy.to_json(),
            "hessian": hessian,
            "determinant": simplify(&res.determinant).to_string(),
            "classification": res.regularity.label(),
            "induced_h": res.hamiltonian.as_ref().map(|h| json!({"h": h.to_string(), "latex": h.to_latex()})),
            "euler_lagrange": equations_json(&el),
            "round_trip": round_trip,
        }),
    );
    report.set("rank", rank);
    report.set("seed", json!(opts.seed));
    report.checks = checks;

    let mut out = Outcome::new(report);
    out.text.push(s.header_line());
    out.text.push("momenta:".into());
    out.text.extend(momenta.iter().map(|e| format!("  {}", e.text())));
    out.text.push(format!("  {}", energy.text()));
    out.text
        .push(format!("Hessian determinant: {}", simplify(&res.determinant)));
    out.text.push(format!("classification: {}", res.regularity.label()));
    match &res.hamiltonian {
        Some(h) => out.text.push(format!("induced h = {h}")),
        None => out.text.push("induced h: none in closed form".into()),
    }
    out.text.push("Euler-Lagrange equations:".into());
    out.text.extend(el.iter().map(|e| format!("  {}", e.text())));
    out.text.extend(rank_lines);
    for c in &out.report.checks {
        out.text
            .push(format!("  [{}] {} ({})", c.status().to_uppercase(), c.name, c.residual));
    }
    out.latex.push("% momenta".into());
    out.latex.extend(momenta.iter().map(Equation::latex));
    out.latex.push(energy.latex());
    if let Some(h) = &res.hamiltonian {
        out.latex.push(format!("h = {}", h.to_latex()));
    }
    out.latex.push("% Euler-Lagrange".into());
    out.latex.extend(el.iter().map(Equation::latex));

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).expect("in-memory write");
    for e in &momenta {
        w.write_record([e.lhs.as_str(), &e.rhs.to_string()])
            .expect("in-memory write");
    }
    w.write_record(["pe", &energy.rhs.to_string()])
        .expect("in-memory write");
    w.write_record(["classification", res.regularity.label()])
        .expect("in-memory write");
    w.write_record(["determinant", &simplify(&res.determinant).to_string()])
        .expect("in-memory write");
    if let Some(h) = &res.hamiltonian {
        w.write_record(["h", &h.to_string()]).expect("in-memory write");
    }
    for (i, e) in el.iter().enumerate() {
        w.write_record([format!("euler_lagrange[{}]", i + 1), e.rhs.to_string()])
            .expect("in-memory write");
    }
    out.csv = String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8");
    out.summary = Some(format!("{}: {}", s.model.name, res.regularity.label()));
    Ok(out)
}
