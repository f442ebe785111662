//! Plain-text and LaTeX rendering. Plain text re-parses with the model-file
//! expression grammar.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::expr::{Expr, Node};
use super::number::Number;

const SUM: u8 = 0;
const PRODUCT: u8 = 1;
const UNARY: u8 = 2;
const POWER: u8 = 3;

#[derive(Clone, Copy, PartialEq)]
enum Style {
    Plain,
    Latex,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, Style::Plain, SUM))
    }
}

impl Expr {
    pub fn to_latex(&self) -> String {
        render(self, Style::Latex, SUM)
    }
}

fn wrap(s: String, own: u8, ctx: u8, style: Style) -> String {
    if own < ctx {
        match style {
            Style::Plain => format!("({s})"),
            Style::Latex => format!("\\left({s}\\right)"),
        }
    } else {
        s
    }
}

fn number_prec(n: &Number) -> u8 {
    match n {
        _ if n.is_negative() => UNARY,
        Number::Rational(r) if !r.is_integer() => PRODUCT,
        Number::Float(v) if v.0.to_string().contains('e') => PRODUCT,
        _ => POWER + 1,
    }
}

fn render_number(n: &Number, style: Style) -> String {
    match (style, n) {
        (Style::Latex, Number::Rational(r)) if !r.is_integer() => {
            let sign = if r.is_negative() { "-" } else { "" };
            format!("{sign}\\frac{{{}}}{{{}}}", r.numer().abs(), r.denom())
        }
        _ => n.to_string(),
    }
}

fn is_negative_term(e: &Expr) -> bool {
    match e.node() {
        Node::Num(n) => n.is_negative(),
        Node::Neg(_) => true,
        Node::Mul(v) => v.first().and_then(Expr::as_number).is_some_and(Number::is_negative),
        _ => false,
    }
}

fn negate_term(e: &Expr) -> Expr {
    match e.node() {
        Node::Num(n) => Expr::num(-n.clone()),
        Node::Neg(a) => a.clone(),
        Node::Mul(v) => {
            let mut v = v.clone();
            let c = v[0].as_number().unwrap().clone();
            if (-c.clone()).is_one() {
                v.remove(0);
            } else {
                v[0] = Expr::num(-c);
            }
            Expr::product(v)
        }
        _ => -e.clone(),
    }
}

fn render(e: &Expr, style: Style, ctx: u8) -> String {
    let (s, own) = render_inner(e, style);
    wrap(s, own, ctx, style)
}

fn render_exponent(r: &BigRational, style: Style) -> String {
    match style {
        Style::Plain => {
            if r.is_integer() && !r.is_negative() {
                r.numer().to_string()
            } else {
                format!("({})", Number::Rational(r.clone()))
            }
        }
        Style::Latex => format!("{{{}}}", render_number(&Number::Rational(r.clone()), style)),
    }
}

fn render_inner(e: &Expr, style: Style) -> (String, u8) {
    match e.node() {
        Node::Num(n) => (render_number(n, style), number_prec(n)),
        Node::Var(c) => (
            match style {
                Style::Plain => c.name(),
                Style::Latex => c.latex(),
            },
            POWER + 1,
        ),
        Node::Func(f, a) => (
            match style {
                Style::Plain => format!("{}({})", f.name(), render(a, style, SUM)),
                Style::Latex => format!("\\{}\\left({}\\right)", f.name(), render(a, style, SUM)),
            },
            POWER + 1,
        ),
        Node::Pow(b, r) => {
            let base = render(b, style, POWER + 1);
            match style {
                Style::Plain => (format!("{base}^{}", render_exponent(r, style)), POWER),
                Style::Latex => {
                    let base = if base.contains('^') {
                        format!("{{{base}}}")
                    } else {
                        base
                    };
                    (format!("{base}^{}", render_exponent(r, style)), POWER)
                }
            }
        }
        Node::Neg(a) => (format!("-{}", render(a, style, UNARY)), UNARY),
        Node::Div(a, b) => match style {
            Style::Plain => (
                format!("{}/{}", render(a, style, PRODUCT), render(b, style, UNARY)),
                PRODUCT,
            ),
            Style::Latex => (
                format!("\\frac{{{}}}{{{}}}", render(a, style, SUM), render(b, style, SUM)),
                POWER + 1,
            ),
        },
        Node::Add(v) => {
            let mut out = String::new();
            for (i, t) in v.iter().enumerate() {
                if i == 0 {
                    out.push_str(&render(t, style, SUM));
                } else if is_negative_term(t) {
                    out.push_str(" - ");
                    out.push_str(&render(&negate_term(t), style, PRODUCT));
                } else {
                    out.push_str(" + ");
                    out.push_str(&render(t, style, PRODUCT));
                }
            }
            (out, SUM)
        }
        Node::Mul(v) => render_product(v, style),
    }
}

fn render_product(v: &[Expr], style: Style) -> (String, u8) {
    let mut coef = Number::one();
    let mut num: Vec<Expr> = Vec::new();
    let mut den: Vec<Expr> = Vec::new();
    for f in v {
        match f.node() {
            Node::Num(n) => coef = &coef * n,
            Node::Pow(b, r) if r.is_negative() => {
                let flipped = -r.clone();
                den.push(if flipped.is_one() { b.clone() } else { b.pow(flipped) });
            }
            _ => num.push(f.clone()),
        }
    }
    let negative = coef.is_negative();
    let coef = coef.abs();
    let (coef_num, coef_den) = match &coef {
        Number::Rational(r) => (
            Number::Rational(BigRational::from_integer(r.numer().clone())),
            Number::Rational(BigRational::from_integer(r.denom().clone())),
        ),
        Number::Float(_) => (coef.clone(), Number::one()),
    };
    let sep = match style {
        Style::Plain => "*",
        Style::Latex => " ",
    };
    let mut top: Vec<String> = Vec::new();
    if !coef_num.is_one() || num.is_empty() {
        top.push(render_number(&coef_num, style));
    }
    top.extend(num.iter().map(|f| render(f, style, POWER)));
    let mut bottom: Vec<String> = Vec::new();
    if !coef_den.is_one() {
        bottom.push(render_number(&coef_den, style));
    }
    bottom.extend(den.iter().map(|f| render(f, style, POWER)));

    let top_s = top.join(sep);
    let body = if bottom.is_empty() {
        top_s
    } else {
        match style {
            Style::Plain => {
                let bot = if bottom.len() > 1 {
                    format!("({})", bottom.join(sep))
                } else {
                    bottom.join(sep)
                };
                format!("{top_s}/{bot}")
            }
            Style::Latex => format!("\\frac{{{top_s}}}{{{}}}", bottom.join(sep)),
        }
    };
    if negative {
        (format!("-{body}"), UNARY)
    } else {
        (body, PRODUCT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::coord::CoordId;
    use crate::symbolic::normal::simplify;

    fn p() -> Expr {
        Expr::var(CoordId::p(1, 1))
    }
    fn q() -> Expr {
        Expr::var(CoordId::y(1))
    }

    #[test]
    fn plain_oscillator() {
        let h = simplify(&((p().powi(2) + q().powi(2)) / Expr::int(2)));
        assert_eq!(h.to_string(), "y1^2/2 + p1_1^2/2");
    }

    #[test]
    fn plain_negative_terms() {
        let e = simplify(&(q() - Expr::int(3) * p() - p().sin()));
        assert_eq!(e.to_string(), "y1 - 3*p1_1 - sin(p1_1)");
    }

    #[test]
    fn plain_denominators() {
        let e = simplify(&(q() / (p() + Expr::one())));
        assert_eq!(e.to_string(), "y1/(1 + p1_1)");
    }

    #[test]
    fn latex_momentum_indices() {
        let e = simplify(&(Expr::var(CoordId::p(1, 2)).powi(2) / Expr::int(2)));
        assert_eq!(e.to_latex(), "\\frac{{p^{2}_{1}}^{2}}{2}");
    }
}
