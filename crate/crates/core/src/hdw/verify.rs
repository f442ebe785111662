//! Zero tests with a numeric fallback for transcendental expressions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::CoordForm;
use crate::symbolic::{evaluate, simplify, Assignment, Expr};

pub const SAMPLE_POINTS: usize = 20;
pub const NUMERIC_ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMethod {
    /// Exact rational-function normalization.
    Structural,
    /// `|value| < 1e-10` at random points.
    Numeric,
}

impl CheckMethod {
    pub fn label(self) -> &'static str {
        match self {
            CheckMethod::Structural => "structural",
            CheckMethod::Numeric => "numeric",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroVerdict {
    pub holds: bool,
    pub method: CheckMethod,
    /// Largest sampled magnitude (numeric method only).
    pub max_abs: f64,
    /// Simplified expressions that failed the structural test.
    pub leftovers: Vec<Expr>,
}

/// Decide whether every expression vanishes identically.
///
/// Rational expressions are decided exactly. If any structurally nonzero
/// remainder contains a transcendental atom, the remainders are sampled at
/// `SAMPLE_POINTS` points drawn from `[0.3, 1.7]` per coordinate.
pub fn verify_zero(exprs: &[Expr], seed: u64) -> ZeroVerdict {
    let leftovers: Vec<Expr> = exprs
        .iter()
        .map(simplify)
        .filter(|e| !crate::symbolic::is_zero(e))
        .collect();
    if leftovers.is_empty() {
        return ZeroVerdict {
            holds: true,
            method: CheckMethod::Structural,
            max_abs: 0.0,
            leftovers,
        };
    }
    if !leftovers.iter().any(Expr::has_transcendental) {
        return ZeroVerdict {
            holds: false,
            method: CheckMethod::Structural,
            max_abs: f64::NAN,
            leftovers,
        };
    }
    let vars: Vec<_> = leftovers
        .iter()
        .flat_map(|e| e.free_vars())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs: f64 = 0.0;
    let mut taken = 0;
    let mut attempts = 0;
    while taken < SAMPLE_POINTS && attempts < 50 * SAMPLE_POINTS {
        attempts += 1;
        let point: Assignment = vars.iter().map(|c| (*c, rng.gen_range(0.3..1.7))).collect();
        let values: Result<Vec<f64>, _> = leftovers.iter().map(|e| evaluate(e, &point)).collect();
        if let Ok(values) = values {
            taken += 1;
            for v in values {
                max_abs = max_abs.max(if v.is_finite() { v.abs() } else { f64::INFINITY });
            }
        }
    }
    ZeroVerdict {
        holds: taken == SAMPLE_POINTS && max_abs < NUMERIC_ZERO_TOL,
        method: CheckMethod::Numeric,
        max_abs,
        leftovers,
    }
}

pub fn verify_form_zero(form: &CoordForm, seed: u64) -> ZeroVerdict {
    let coeffs: Vec<Expr> = form.terms().map(|(_, c)| c.clone()).collect();
    verify_zero(&coeffs, seed)
}
