use num_rational::BigRational;
use num_traits::One;

use super::coord::CoordId;
use super::expr::{Expr, Func, Node};
use super::normal::simplify;

impl Expr {
    /// Partial derivative with every other coordinate held fixed, simplified.
    pub fn diff(&self, wrt: CoordId) -> Expr {
        simplify(&raw_diff(self, wrt))
    }
}

fn raw_diff(e: &Expr, wrt: CoordId) -> Expr {
    if !e.depends_on(wrt) {
        return Expr::zero();
    }
    match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Var(c) => {
            if *c == wrt {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Neg(a) => -raw_diff(a, wrt),
        Node::Add(v) => Expr::sum(v.iter().map(|t| raw_diff(t, wrt)).collect()),
        Node::Mul(v) => {
            let mut terms = Vec::new();
            for (i, f) in v.iter().enumerate() {
                if !f.depends_on(wrt) {
                    continue;
                }
                let mut factors: Vec<Expr> = v
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, g)| g.clone())
                    .collect();
                factors.push(raw_diff(f, wrt));
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Node::Div(a, b) => {
            // (a/b)' = a'/b - a b'/b^2
            let da = raw_diff(a, wrt);
            let db = raw_diff(b, wrt);
            &da / b - a * &db / b.powi(2)
        }
        Node::Pow(b, r) => {
            let lowered = r - BigRational::one();
            Expr::num(r.clone().into()) * b.pow(lowered) * raw_diff(b, wrt)
        }
        Node::Func(f, a) => {
            let da = raw_diff(a, wrt);
            let outer = match f {
                Func::Sin => a.cos(),
                Func::Cos => -a.sin(),
                Func::Exp => a.exp(),
                Func::Log => Expr::one() / a,
            };
            outer * da
        }
    }
}
