//! Recursive-descent parser for the expression language used in model
//! files. Grammar (see docs/grammar.md):
//!
//! ```text
//! expr  = term { ("+" | "-") term } ;
//! term  = unary { ("*" | "/") unary } ;
//! unary = ("+" | "-") unary | power ;
//! power = atom [ "^" unary ] ;
//! atom  = number | name | name "(" expr ")" | "(" expr ")" ;
//! ```

use hdw_forge_core::geometry::{Bundle, BundleChart};
use hdw_forge_core::symbolic::{constant_value, CoordId, Expr, Func, Number};

/// Where an expression is allowed to live.
#[derive(Clone, Copy, Debug)]
pub struct Scope {
    pub chart: BundleChart,
    pub bundle: Bundle,
    /// Only these base coordinates are allowed (e.g. `x2` for initial
    /// profiles); `None` means the bundle decides.
    pub base_only: Option<&'static [usize]>,
    /// Also accept second-order jet coordinates `yA_nu_eta`.
    pub second_order: bool,
}

impl Scope {
    pub fn new(chart: BundleChart, bundle: Bundle) -> Self {
        Scope {
            chart,
            bundle,
            base_only: None,
            second_order: false,
        }
    }

    /// Jet coordinates plus second derivatives, for second-order equations.
    pub fn second_jet(chart: BundleChart) -> Self {
        Scope {
            second_order: true,
            ..Scope::new(chart, Bundle::Jet)
        }
    }

    /// Constant expressions: no coordinates at all.
    pub fn constant(chart: BundleChart) -> Self {
        Scope {
            chart,
            bundle: Bundle::Configuration,
            base_only: Some(&[]),
            second_order: false,
        }
    }

    pub fn base(chart: BundleChart, allowed: &'static [usize]) -> Self {
        Scope {
            chart,
            bundle: Bundle::Configuration,
            base_only: Some(allowed),
            second_order: false,
        }
    }

    fn allows(&self, c: CoordId) -> bool {
        match self.base_only {
            Some(allowed) => {
                matches!(c, CoordId::Base(nu) if allowed.contains(&(nu as usize)))
                    && self.chart.contains(c, Bundle::Configuration)
            }
            None => match c {
                CoordId::SecondJet { a, nu, eta } if self.second_order => {
                    (1..=self.chart.n()).contains(&(a as usize))
                        && nu >= 1
                        && nu <= eta
                        && (eta as usize) <= self.chart.m()
                }
                _ => self.chart.contains(c, self.bundle),
            },
        }
    }

    pub fn names(&self) -> Vec<String> {
        let coords = match self.base_only {
            Some(allowed) => allowed.iter().map(|nu| CoordId::x(*nu)).collect(),
            None => {
                let mut all = self.chart.coords(self.bundle);
                if self.second_order {
                    for a in 1..=self.chart.n() {
                        for nu in 1..=self.chart.m() {
                            all.extend((nu..=self.chart.m()).map(|eta| CoordId::y2(a, nu, eta)));
                        }
                    }
                }
                all
            }
        };
        coords.into_iter().map(|c| c.name()).collect()
    }

    fn describe(&self) -> String {
        match self.base_only {
            Some([]) => "a constant expression".into(),
            Some(_) => format!("an expression of {}", self.names().join(", ")),
            None => format!("the {} chart (m={}, n={})", self.bundle, self.chart.m(), self.chart.n()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExprError {
    /// 1-based character column within the expression text.
    pub column: usize,
    pub message: String,
    pub suggestions: Vec<String>,
}

impl ExprError {
    fn at(column: usize, message: impl Into<String>) -> Self {
        ExprError {
            column,
            message: message.into(),
            suggestions: Vec::new(),
        }
    }
}

const FUNCTIONS: [&str; 5] = ["sin", "cos", "exp", "log", "sqrt"];

/// Close matches among the names valid in a scope.
pub fn suggest(name: &str, candidates: &[String]) -> Vec<String> {
    let mut scored: Vec<(f64, &String)> = candidates
        .iter()
        .map(|c| (strsim::jaro_winkler(name, c), c))
        .filter(|(s, _)| *s >= 0.75)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored.into_iter().take(3).map(|(_, c)| c.clone()).collect()
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Number),
    Name(String),
    Op(char),
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j], '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let lit_clean = lit.replace("e+", "e").replace("E+", "E");
            let n = Number::parse_decimal(&lit_clean)
                .ok_or_else(|| ExprError::at(col, format!("malformed number `{lit}`")))?;
            out.push((Tok::Num(n), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Name(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(ExprError::at(col, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    scope: &'a Scope,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        match self.peek() {
            Tok::Op(c) if *c == op => {
                self.bump();
                Ok(())
            }
            _ => Err(ExprError::at(self.col(), format!("expected `{op}`"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    acc = acc / self.unary()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let col = self.col();
            let exponent = self.unary()?;
            let r = constant_value(&exponent)
                .and_then(|n| n.as_rational().cloned())
                .ok_or_else(|| ExprError::at(col, "exponent must be a rational constant"))?;
            return Ok(base.pow(r));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Num(n) => Ok(Expr::num(n)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Name(name) => {
                if FUNCTIONS.contains(&name.as_str()) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(match Func::from_name(&name) {
                        Some(f) => Expr::apply(f, arg),
                        None => arg.pow(hdw_forge_core::symbolic::rational(1, 2)),
                    });
                }
                if name == "pi" {
                    return Ok(Expr::float(std::f64::consts::PI));
                }
                match CoordId::parse_name(&name) {
                    Some(c) if self.scope.allows(c) => Ok(Expr::var(c)),
                    _ => {
                        let mut candidates = self.scope.names();
                        candidates.push("pi".into());
                        Err(ExprError {
                            column: col,
                            message: format!("unknown coordinate `{name}` for {}", self.scope.describe()),
                            suggestions: suggest(&name, &candidates),
                        })
                    }
                }
            }
            Tok::End => Err(ExprError::at(col, "unexpected end of expression")),
            Tok::Op(c) => Err(ExprError::at(col, format!("unexpected `{c}`"))),
        }
    }
}

/// Parse expression text against a scope.
pub fn parse_expr(text: &str, scope: &Scope) -> Result<Expr, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, scope };
    if matches!(p.peek(), Tok::End) {
        return Err(ExprError::at(1, "empty expression"));
    }
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(ExprError::at(p.col(), "unexpected trailing input")),
    }
}

/// Parse and evaluate a constant expression.
pub fn parse_constant(text: &str, chart: BundleChart) -> Result<f64, ExprError> {
    let e = parse_expr(text, &Scope::constant(chart))?;
    let v =
        hdw_forge_core::symbolic::evaluate(&e, &Default::default()).map_err(|err| ExprError::at(1, err.to_string()))?;
    if !v.is_finite() {
        return Err(ExprError::at(1, "value is not finite"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hdw_forge_core::symbolic::equivalent;

    fn chart(m: usize, n: usize) -> BundleChart {
        BundleChart::new(m, n).unwrap()
    }

    fn restricted(m: usize, n: usize) -> Scope {
        Scope::new(chart(m, n), Bundle::Restricted)
    }

    #[test]
    fn oscillator_text() {
        let e = parse_expr("(p1_1^2 + y1^2)/2", &restricted(1, 1)).unwrap();
        let (p, q) = (Expr::var(CoordId::p(1, 1)), Expr::var(CoordId::y(1)));
        assert!(equivalent(&e, &((p.powi(2) + q.powi(2)) / Expr::int(2))));
    }

    #[test]
    fn precedence_and_associativity() {
        let s = restricted(1, 1);
        let y = Expr::var(CoordId::y(1));
        assert!(equivalent(&parse_expr("-y1^2", &s).unwrap(), &-y.powi(2)));
        assert!(equivalent(&parse_expr("y1^2^3", &s).unwrap(), &y.powi(8)));
        assert!(equivalent(
            &parse_expr("2^-1*y1", &s).unwrap(),
            &(y.clone() / Expr::int(2))
        ));
        assert!(equivalent(
            &parse_expr("1 - y1 - y1", &s).unwrap(),
            &(Expr::one() - Expr::int(2) * &y)
        ));
        assert!(equivalent(&parse_expr("y1/2/y1", &s).unwrap(), &Expr::ratio(1, 2)));
        assert!(equivalent(&parse_expr("sqrt(y1)^2", &s).unwrap(), &y));
        assert!(equivalent(&parse_expr("0.5e1*y1", &s).unwrap(), &(Expr::int(5) * &y)));
    }

    #[test]
    fn unknown_coordinate_suggests() {
        let err = parse_expr("p2_1 + y1", &restricted(1, 1)).unwrap_err();
        assert_eq!(err.column, 1);
        assert!(err.message.contains("p2_1"));
        assert!(err.suggestions.contains(&"p1_1".to_string()), "{:?}", err.suggestions);
        let err = parse_expr("y1 + pe", &restricted(1, 1)).unwrap_err();
        assert_eq!(err.column, 6);
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let s = restricted(1, 1);
        assert_eq!(parse_expr("y1 + * 2", &s).unwrap_err().column, 6);
        assert_eq!(parse_expr("(y1 + 2", &s).unwrap_err().column, 8);
        assert_eq!(parse_expr("y1 $ 2", &s).unwrap_err().column, 4);
        assert_eq!(
            parse_expr("y1^y1", &s).unwrap_err().message,
            "exponent must be a rational constant"
        );
        assert!(parse_expr("   ", &s).is_err());
        assert!(parse_expr("y1 y1", &s).is_err());
    }

    #[test]
    fn constants() {
        let c = chart(2, 1);
        assert!((parse_constant("2*pi", c).unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!(parse_constant("x1", c).is_err());
        assert!(parse_constant("1/0", c).is_err());
        let s = Scope::base(c, &[2]);
        assert!(parse_expr("sin(x2)", &s).is_ok());
        assert!(parse_expr("sin(x1)", &s).is_err());
    }

    #[test]
    fn rendering_reparses() {
        let s = Scope::new(chart(2, 2), Bundle::Restricted);
        for text in [
            "(p1_1^2 - p1_2^2)/2 + y1^4/4",
            "x1*sin(y2)/(1 + p2_1^2)",
            "exp(-x2)*log(2 + y1^2) - 3/7*p2_2",
            "y1^(1/2) + (y1 + y2)^(-3)",
            "-(y1 - y2)^3",
        ] {
            let e = hdw_forge_core::symbolic::simplify(&parse_expr(text, &s).unwrap());
            let again = parse_expr(&e.to_string(), &s).unwrap();
            assert!(equivalent(&e, &again), "{text} -> {e}");
        }
    }
}
