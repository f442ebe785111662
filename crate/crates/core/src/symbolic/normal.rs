//! Expanded polynomial normal form over "atoms".
//!
//! An atom is a variable, an elementary function of a simplified argument,
//! or a compound base that cannot be expanded: a sum raised to a negative or
//! fractional power, a monomial or constant raised to a fractional power.
//! A normal form is a sum of `coefficient * Π atom^exponent` with like terms
//! combined and zero terms removed. Converting back to an `Expr` gives the
//! canonical simplified tree, so equality of simplified trees decides
//! polynomial identities.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::expr::{is_integer_exponent, Expr, Func, Node};
use super::number::Number;

type Monomial = BTreeMap<Expr, BigRational>;

#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, Number>,
}

impl Poly {
    fn zero() -> Self {
        Poly::default()
    }

    fn constant(n: Number) -> Self {
        let mut p = Poly::zero();
        if !n.is_zero() {
            p.terms.insert(Monomial::new(), n);
        }
        p
    }

    fn atom(a: Expr, e: BigRational) -> Self {
        let mut m = Monomial::new();
        m.insert(a, e);
        Poly::settle(m, Number::one())
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn as_constant(&self) -> Option<Number> {
        match self.terms.len() {
            0 => Some(Number::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: Number) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn add_poly(&mut self, other: Poly) {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
    }

    fn scale(&self, k: &Number) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    fn neg(self) -> Poly {
        self.scale(&Number::int(-1))
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let (m, needs_settle) = merge_monomials(m1, m2);
                let c = c1 * c2;
                if needs_settle {
                    out.add_poly(Poly::settle(m, c));
                } else {
                    out.add_term(m, c);
                }
            }
        }
        out
    }

    fn pow_int(&self, k: u64) -> Poly {
        let mut result = Poly::constant(Number::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Turn a raw monomial into a normal-form polynomial: compound atoms whose
    /// exponent became a non-negative integer are expanded and numeric atoms
    /// with integer exponents fold into the coefficient.
    fn settle(m: Monomial, c: Number) -> Poly {
        let mut kept = Monomial::new();
        let mut coef = c;
        let mut pending: Vec<(Expr, i64)> = Vec::new();
        for (atom, e) in m {
            if e.is_zero() {
                continue;
            }
            match (atom.node(), is_integer_exponent(&e)) {
                (Node::Num(n), Some(k)) if !n.is_zero() => {
                    coef = &coef * &n.powi(k).expect("nonzero base");
                }
                (Node::Num(n), _) if n.is_one() => {}
                (Node::Mul(_), Some(k)) => pending.push((atom, k)),
                (Node::Add(_), Some(k)) if k >= 0 => pending.push((atom, k)),
                _ => {
                    kept.insert(atom, e);
                }
            }
        }
        let mut out = Poly::zero();
        out.add_term(kept, coef);
        for (atom, k) in pending {
            let base = from_expr(&atom);
            let factor = if k >= 0 {
                base.pow_int(k as u64)
            } else {
                base.recip().pow_int((-k) as u64)
            };
            out = out.mul(&factor);
        }
        out
    }

    fn recip(&self) -> Poly {
        match self.terms.len() {
            0 => Poly::atom(Expr::zero(), -BigRational::one()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                let inv: Monomial = m.iter().map(|(a, e)| (a.clone(), -e.clone())).collect();
                Poly::settle(inv, c.recip().expect("nonzero coefficient"))
            }
            _ => {
                // Normalize the content so that 1/(2x+2) and 1/(2(x+1)) agree.
                let lead = self.terms.values().next().unwrap().clone();
                let inv_lead = lead.recip().expect("nonzero coefficient");
                let q = self.scale(&inv_lead);
                let mut m = Monomial::new();
                m.insert(to_expr(&q), -BigRational::one());
                let mut out = Poly::zero();
                out.add_term(m, inv_lead);
                out
            }
        }
    }

    fn frac_pow(&self, r: &BigRational) -> Poly {
        if self.is_zero() {
            return if r.is_positive() {
                Poly::zero()
            } else {
                Poly::atom(Expr::zero(), r.clone())
            };
        }
        if let Some(c) = self.as_constant() {
            if c.is_one() {
                return Poly::constant(Number::one());
            }
            return Poly::atom(Expr::num(c), r.clone());
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if c.is_one() && m.len() == 1 {
                let (a, e) = m.iter().next().unwrap();
                // (a^e)^r = a^(e r) only when a^e already forces a >= 0 or e = 1.
                if e.is_one() || !e.is_integer() {
                    return Poly::atom(a.clone(), e * r);
                }
            }
        }
        Poly::atom(to_expr(self), r.clone())
    }

    /// Largest negative exponent of each summed denominator atom.
    fn denominators(&self) -> BTreeMap<Expr, i64> {
        let mut dens: BTreeMap<Expr, i64> = BTreeMap::new();
        for m in self.terms.keys() {
            for (a, e) in m {
                if let (Node::Add(_), Some(k)) = (a.node(), is_integer_exponent(e)) {
                    if k < 0 {
                        let slot = dens.entry(a.clone()).or_insert(0);
                        *slot = (*slot).max(-k);
                    }
                }
            }
        }
        dens
    }

    fn mul_atom_power(&self, atom: &Expr, k: i64) -> Poly {
        let mut m = Monomial::new();
        m.insert(atom.clone(), BigRational::from_integer(k.into()));
        let mut f = Poly::zero();
        f.terms.insert(m, Number::one());
        self.mul(&f)
    }
}

fn merge_monomials(a: &Monomial, b: &Monomial) -> (Monomial, bool) {
    let mut out = a.clone();
    let mut needs_settle = false;
    for (atom, e) in b {
        let slot = out.entry(atom.clone()).or_insert_with(BigRational::zero);
        *slot += e;
        if slot.is_zero() {
            out.remove(atom);
        } else if !matches!(atom.node(), Node::Var(_) | Node::Func(..)) {
            needs_settle = true;
        }
    }
    (out, needs_settle)
}

fn fold_function(f: Func, arg: &Expr) -> Option<Expr> {
    let n = arg.as_number()?;
    match n {
        Number::Float(v) => {
            let x = v.0;
            let y = match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log if x > 0.0 => x.ln(),
                Func::Log => return None,
            };
            Some(Expr::float(y))
        }
        Number::Rational(_) => match f {
            Func::Sin if n.is_zero() => Some(Expr::zero()),
            Func::Cos | Func::Exp if n.is_zero() => Some(Expr::one()),
            Func::Log if n.is_one() => Some(Expr::zero()),
            _ => None,
        },
    }
}

pub(crate) fn from_expr(e: &Expr) -> Poly {
    match e.node() {
        Node::Num(n) => Poly::constant(n.clone()),
        Node::Var(_) => Poly::atom(e.clone(), BigRational::one()),
        Node::Neg(a) => from_expr(a).neg(),
        Node::Add(v) => {
            let mut acc = Poly::zero();
            for t in v {
                acc.add_poly(from_expr(t));
            }
            acc
        }
        Node::Mul(v) => {
            let mut acc = Poly::constant(Number::one());
            for f in v {
                if acc.is_zero() {
                    break;
                }
                acc = acc.mul(&from_expr(f));
            }
            acc
        }
        Node::Div(a, b) => from_expr(a).mul(&from_expr(b).recip()),
        Node::Pow(b, r) => {
            let pb = from_expr(b);
            match is_integer_exponent(r) {
                Some(k) if k >= 0 => pb.pow_int(k as u64),
                Some(k) => pb.recip().pow_int((-k) as u64),
                None => pb.frac_pow(r),
            }
        }
        Node::Func(f, a) => {
            let sa = simplify(a);
            match fold_function(*f, &sa) {
                Some(folded) => from_expr(&folded),
                None => Poly::atom(Expr::apply(*f, sa), BigRational::one()),
            }
        }
    }
}

pub(crate) fn to_expr(p: &Poly) -> Expr {
    let terms: Vec<Expr> = p
        .terms
        .iter()
        .map(|(m, c)| {
            let mut factors: Vec<Expr> = Vec::with_capacity(m.len() + 1);
            if !c.is_one() || m.is_empty() {
                factors.push(Expr::num(c.clone()));
            }
            for (a, e) in m {
                if e.is_one() {
                    factors.push(a.clone());
                } else {
                    factors.push(a.pow(e.clone()));
                }
            }
            Expr::product(factors)
        })
        .collect();
    Expr::sum(terms)
}

/// Canonical simplified form. Idempotent; preserves evaluation.
pub fn simplify(e: &Expr) -> Expr {
    to_expr(&from_expr(e))
}

/// Exact zero test for the rational-function fragment: denominators that are
/// sums are cleared before the expanded numerator is compared with zero.
/// Transcendental atoms are treated as independent symbols, so `true` is
/// always sound but `false` can miss identities such as `sin²+cos²-1`.
pub fn is_zero(e: &Expr) -> bool {
    let mut p = from_expr(e);
    for _ in 0..16 {
        if p.is_zero() {
            return true;
        }
        let dens = p.denominators();
        if dens.is_empty() {
            return false;
        }
        for (atom, k) in dens {
            p = p.mul_atom_power(&atom, k);
        }
    }
    p.is_zero()
}

/// `is_zero(a - b)`.
pub fn equivalent(a: &Expr, b: &Expr) -> bool {
    is_zero(&(a - b))
}

/// If `e` simplifies to a numeric constant, return it.
pub fn constant_value(e: &Expr) -> Option<Number> {
    from_expr(e).as_constant()
}
