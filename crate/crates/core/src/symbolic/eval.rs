use std::collections::BTreeMap;

use super::coord::CoordId;
use super::expr::{is_integer_exponent, Expr, Func, Node};
use super::number::rational_to_f64;
use super::SymbolicError;

/// Variable assignment used by `evaluate`.
pub type Assignment = BTreeMap<CoordId, f64>;

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Slot(usize),
    Neg(Box<Op>),
    Add(Vec<Op>),
    Mul(Vec<Op>),
    Div(Box<Op>, Box<Op>, Expr),
    PowI(Box<Op>, i32, Expr),
    PowF(Box<Op>, f64, Expr),
    Func(Func, Box<Op>, Expr),
}

/// An expression lowered to a slot-indexed evaluation tree. Used on hot
/// paths (integrators, rank sampling) where map lookups would dominate.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    root: Op,
}

impl CompiledExpr {
    /// Compile against a fixed slot layout. Every free variable of `e` must
    /// appear in `slots`.
    pub fn compile(e: &Expr, slots: &[CoordId]) -> Result<Self, SymbolicError> {
        Ok(CompiledExpr { root: lower(e, slots)? })
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, SymbolicError> {
        run(&self.root, values)
    }
}

fn lower(e: &Expr, slots: &[CoordId]) -> Result<Op, SymbolicError> {
    Ok(match e.node() {
        Node::Num(n) => Op::Const(n.to_f64()),
        Node::Var(c) => Op::Slot(
            slots
                .iter()
                .position(|s| s == c)
                .ok_or(SymbolicError::IncompleteAssignment(*c))?,
        ),
        Node::Neg(a) => Op::Neg(Box::new(lower(a, slots)?)),
        Node::Add(v) => Op::Add(v.iter().map(|t| lower(t, slots)).collect::<Result<_, _>>()?),
        Node::Mul(v) => Op::Mul(v.iter().map(|t| lower(t, slots)).collect::<Result<_, _>>()?),
        Node::Div(a, b) => Op::Div(Box::new(lower(a, slots)?), Box::new(lower(b, slots)?), e.clone()),
        Node::Pow(b, r) => {
            let base = Box::new(lower(b, slots)?);
            match is_integer_exponent(r).and_then(|k| i32::try_from(k).ok()) {
                Some(k) => Op::PowI(base, k, e.clone()),
                None => Op::PowF(base, rational_to_f64(r), e.clone()),
            }
        }
        Node::Func(f, a) => Op::Func(*f, Box::new(lower(a, slots)?), e.clone()),
    })
}

fn domain(node: &Expr, reason: &str) -> SymbolicError {
    SymbolicError::Domain {
        reason: reason.to_string(),
        node: node.to_string(),
    }
}

fn run(op: &Op, values: &[f64]) -> Result<f64, SymbolicError> {
    Ok(match op {
        Op::Const(c) => *c,
        Op::Slot(i) => values[*i],
        Op::Neg(a) => -run(a, values)?,
        Op::Add(v) => {
            let mut acc = 0.0;
            for t in v {
                acc += run(t, values)?;
            }
            acc
        }
        Op::Mul(v) => {
            let mut acc = 1.0;
            for t in v {
                acc *= run(t, values)?;
            }
            acc
        }
        Op::Div(a, b, node) => {
            let den = run(b, values)?;
            if den == 0.0 {
                return Err(domain(node, "division by zero"));
            }
            run(a, values)? / den
        }
        Op::PowI(b, k, node) => {
            let base = run(b, values)?;
            if base == 0.0 && *k < 0 {
                return Err(domain(node, "division by zero"));
            }
            base.powi(*k)
        }
        Op::PowF(b, r, node) => {
            let base = run(b, values)?;
            if base < 0.0 {
                return Err(domain(node, "fractional power of a negative number"));
            }
            if base == 0.0 && *r < 0.0 {
                return Err(domain(node, "division by zero"));
            }
            base.powf(*r)
        }
        Op::Func(f, a, node) => {
            let x = run(a, values)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(domain(node, "log of a non-positive number"));
                    }
                    x.ln()
                }
            }
        }
    })
}

/// Evaluate `e` under a full assignment of its free variables.
pub fn evaluate(e: &Expr, assignment: &Assignment) -> Result<f64, SymbolicError> {
    let slots: Vec<CoordId> = assignment.keys().copied().collect();
    let values: Vec<f64> = assignment.values().copied().collect();
    CompiledExpr::compile(e, &slots)?.eval(&values)
}

/// Result of comparing a symbolic derivative with a central difference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdCheck {
    pub symbolic: f64,
    pub numeric: f64,
    pub relerr: f64,
}

/// Compare `∂e/∂wrt` against `(e(x+h) - e(x-h)) / 2h` at `point`.
pub fn fd_check(e: &Expr, wrt: CoordId, point: &Assignment, step: f64) -> Result<FdCheck, SymbolicError> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let symbolic = evaluate(&e.diff(wrt), point)?;
    let base = *point.get(&wrt).ok_or(SymbolicError::IncompleteAssignment(wrt))?;
    let mut shifted = point.clone();
    shifted.insert(wrt, base + step);
    let plus = evaluate(e, &shifted)?;
    shifted.insert(wrt, base - step);
    let minus = evaluate(e, &shifted)?;
    let numeric = (plus - minus) / (2.0 * step);
    let relerr = (symbolic - numeric).abs() / symbolic.abs().max(1.0);
    Ok(FdCheck {
        symbolic,
        numeric,
        relerr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::normal::simplify;

    fn at(pairs: &[(CoordId, f64)]) -> Assignment {
        pairs.iter().copied().collect()
    }

    #[test]
    fn oscillator_value() {
        let p = Expr::var(CoordId::p(1, 1));
        let q = Expr::var(CoordId::y(1));
        let h = (p.powi(2) + q.powi(2)) / Expr::int(2);
        let v = evaluate(&h, &at(&[(CoordId::p(1, 1), 3.0), (CoordId::y(1), 4.0)])).unwrap();
        assert_eq!(v, 12.5);
    }

    #[test]
    fn elementary_values() {
        let t = Expr::var(CoordId::x(1));
        assert_eq!(evaluate(&t.sin(), &at(&[(CoordId::x(1), 0.0)])).unwrap(), 0.0);
        let e = Expr::zero().exp() * Expr::var(CoordId::y(1));
        assert_eq!(evaluate(&e, &at(&[(CoordId::y(1), 7.0)])).unwrap(), 7.0);
    }

    #[test]
    fn simplify_then_evaluate_agrees() {
        let x = Expr::var(CoordId::x(1));
        let e = (x.clone() + Expr::one()).powi(2);
        let a = at(&[(CoordId::x(1), 2.0)]);
        assert_eq!(evaluate(&e, &a).unwrap(), 9.0);
        assert_eq!(evaluate(&simplify(&e), &a).unwrap(), 9.0);
    }

    #[test]
    fn missing_variable_is_reported() {
        let e = Expr::var(CoordId::y(2));
        assert_eq!(
            evaluate(&e, &Assignment::new()),
            Err(SymbolicError::IncompleteAssignment(CoordId::y(2)))
        );
    }

    #[test]
    fn domain_errors_name_the_node() {
        let q = Expr::var(CoordId::y(1));
        let a = at(&[(CoordId::y(1), 0.0)]);
        let err = evaluate(&(Expr::one() / q.clone()), &a).unwrap_err();
        assert!(matches!(err, SymbolicError::Domain { ref node, .. } if node.contains("y1")));
        let err = evaluate(&q.log(), &a).unwrap_err();
        assert!(matches!(err, SymbolicError::Domain { ref reason, .. } if reason.contains("log")));
    }

    #[test]
    fn fd_examples() {
        let q = Expr::var(CoordId::y(1));
        let r = fd_check(&q.powi(3), CoordId::y(1), &at(&[(CoordId::y(1), 2.0)]), 1e-5).unwrap();
        assert_eq!(r.symbolic, 12.0);
        assert!(r.relerr < 1e-8, "{r:?}");

        let t = Expr::var(CoordId::x(1));
        let r = fd_check(&t.sin(), CoordId::x(1), &at(&[(CoordId::x(1), 1.0)]), 1e-5).unwrap();
        assert!((r.symbolic - 1f64.cos()).abs() < 1e-15);
        assert!(r.relerr < 1e-8, "{r:?}");

        let r = fd_check(&Expr::int(5), CoordId::y(1), &at(&[(CoordId::y(1), 0.3)]), 1e-5).unwrap();
        assert_eq!((r.symbolic, r.numeric), (0.0, 0.0));
    }
}
