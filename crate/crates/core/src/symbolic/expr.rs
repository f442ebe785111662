use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;

use super::coord::CoordId;
use super::number::Number;

/// Elementary functions supported by the expression language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// Expression tree node. Variant order is the op-kind part of the canonical
/// ordering used by `simplify`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(Number),
    Var(CoordId),
    Func(Func, Expr),
    Pow(Expr, BigRational),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
    Neg(Expr),
    Div(Expr, Expr),
}

/// Immutable, cheaply clonable symbolic expression.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn num(n: Number) -> Self {
        Expr::from_node(Node::Num(n))
    }

    pub fn int(v: i64) -> Self {
        Expr::num(Number::int(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Expr::num(Number::ratio(num, den))
    }

    pub fn float(v: f64) -> Self {
        Expr::num(Number::float(v))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn var(c: CoordId) -> Self {
        Expr::from_node(Node::Var(c))
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Add(terms)),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Self {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Mul(factors)),
        }
    }

    pub fn pow(&self, exponent: BigRational) -> Self {
        Expr::from_node(Node::Pow(self.clone(), exponent))
    }

    pub fn powi(&self, k: i64) -> Self {
        self.pow(BigRational::from_integer(k.into()))
    }

    pub fn apply(f: Func, arg: Expr) -> Self {
        Expr::from_node(Node::Func(f, arg))
    }

    pub fn sin(&self) -> Self {
        Expr::apply(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Self {
        Expr::apply(Func::Cos, self.clone())
    }

    pub fn exp(&self) -> Self {
        Expr::apply(Func::Exp, self.clone())
    }

    pub fn log(&self) -> Self {
        Expr::apply(Func::Log, self.clone())
    }

    pub fn as_number(&self) -> Option<&Number> {
        match self.node() {
            Node::Num(n) => Some(n),
            _ => None,
        }
    }

    /// True only for the literal zero. Use `is_zero` in `normal` for
    /// semantic zero-testing.
    pub fn is_literal_zero(&self) -> bool {
        self.as_number().is_some_and(Number::is_zero)
    }

    pub fn is_literal_one(&self) -> bool {
        self.as_number().is_some_and(Number::is_one)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Num(_) | Node::Var(_) => vec![],
            Node::Func(_, a) | Node::Pow(a, _) | Node::Neg(a) => vec![a],
            Node::Div(a, b) => vec![a, b],
            Node::Mul(v) | Node::Add(v) => v.iter().collect(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<CoordId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<CoordId>) {
        if let Node::Var(c) = self.node() {
            out.insert(*c);
        }
        for ch in self.children() {
            ch.collect_vars(out);
        }
    }

    pub fn depends_on(&self, c: CoordId) -> bool {
        match self.node() {
            Node::Var(v) => *v == c,
            _ => self.children().into_iter().any(|ch| ch.depends_on(c)),
        }
    }

    pub fn has_transcendental(&self) -> bool {
        match self.node() {
            Node::Func(..) => true,
            Node::Pow(b, e) => !e.is_integer() || b.has_transcendental(),
            _ => self.children().into_iter().any(Expr::has_transcendental),
        }
    }

    /// Replace variables by expressions. The result is not simplified.
    pub fn substitute(&self, map: &BTreeMap<CoordId, Expr>) -> Expr {
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Var(c) => map.get(c).cloned().unwrap_or_else(|| self.clone()),
            Node::Func(f, a) => Expr::apply(*f, a.substitute(map)),
            Node::Pow(b, e) => b.substitute(map).pow(e.clone()),
            Node::Neg(a) => -a.substitute(map),
            Node::Div(a, b) => a.substitute(map) / b.substitute(map),
            Node::Mul(v) => Expr::product(v.iter().map(|e| e.substitute(map)).collect()),
            Node::Add(v) => Expr::sum(v.iter().map(|e| e.substitute(map)).collect()),
        }
    }

    pub fn substitute_one(&self, c: CoordId, by: &Expr) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(c, by.clone());
        self.substitute(&map)
    }

    /// Tree depth (a leaf has depth 1).
    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Expr::depth).max().unwrap_or(0)
    }
}

impl From<CoordId> for Expr {
    fn from(c: CoordId) -> Self {
        Expr::var(c)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_node(Node::Neg(self))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, |$a:ident, $b:ident| $body:expr) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let ($a, $b) = (self, rhs);
                $body
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let ($a, $b) = (self.clone(), rhs.clone());
                $body
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let ($a, $b) = (self, rhs.clone());
                $body
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let ($a, $b) = (self.clone(), rhs);
                $body
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::from_node(Node::Add(vec![a, b])));
binop!(Sub, sub, |a, b| Expr::from_node(Node::Add(vec![a, -b])));
binop!(Mul, mul, |a, b| Expr::from_node(Node::Mul(vec![a, b])));
binop!(Div, div, |a, b| Expr::from_node(Node::Div(a, b)));

/// `k/d` as an exact rational exponent.
pub fn rational(k: i64, d: i64) -> BigRational {
    BigRational::new(k.into(), d.into())
}

pub(crate) fn is_integer_exponent(e: &BigRational) -> Option<i64> {
    if e.is_integer() {
        num_traits::ToPrimitive::to_i64(e.numer())
    } else {
        None
    }
}
