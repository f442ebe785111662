use std::fmt;

use serde::{Deserialize, Serialize};

/// A chart coordinate, identified by its role and indices.
///
/// All indices are 1-based. The derived ordering is the total coordinate
/// order used for wedge bases: base `x`, fiber `y`, multimomenta `p^ν_A`
/// (sorted by `A` then `ν`), the extended coordinate `p`, then the
/// Lagrangian-side velocities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CoordId {
    /// Base coordinate `x^ν`.
    Base(u8),
    /// Fiber coordinate `y^A`.
    Fiber(u8),
    /// Multimomentum `p^ν_A`.
    Momentum { a: u8, nu: u8 },
    /// The extra scalar coordinate `p` of the extended multimomentum bundle.
    Extended,
    /// Jet velocity `v^A_ν`.
    Velocity { a: u8, nu: u8 },
    /// Formal second derivative `y^A_{νη}` with `ν ≤ η`. Only the
    /// Euler-Lagrange oracle creates these.
    SecondJet { a: u8, nu: u8, eta: u8 },
    /// Parameter `s_k` of an embedded submanifold.
    Param(u8),
}

impl CoordId {
    pub fn x(nu: usize) -> Self {
        CoordId::Base(nu as u8)
    }

    pub fn y(a: usize) -> Self {
        CoordId::Fiber(a as u8)
    }

    /// `p^ν_A`, written `pA_ν` in expression text.
    pub fn p(a: usize, nu: usize) -> Self {
        CoordId::Momentum {
            a: a as u8,
            nu: nu as u8,
        }
    }

    pub fn pe() -> Self {
        CoordId::Extended
    }

    pub fn v(a: usize, nu: usize) -> Self {
        CoordId::Velocity {
            a: a as u8,
            nu: nu as u8,
        }
    }

    /// Symmetric second-order jet symbol; the index pair is sorted.
    pub fn y2(a: usize, nu: usize, eta: usize) -> Self {
        let (lo, hi) = if nu <= eta { (nu, eta) } else { (eta, nu) };
        CoordId::SecondJet {
            a: a as u8,
            nu: lo as u8,
            eta: hi as u8,
        }
    }

    pub fn param(k: usize) -> Self {
        CoordId::Param(k as u8)
    }

    /// Plain-text name as accepted by the expression parser.
    pub fn name(&self) -> String {
        match *self {
            CoordId::Base(nu) => format!("x{nu}"),
            CoordId::Fiber(a) => format!("y{a}"),
            CoordId::Momentum { a, nu } => format!("p{a}_{nu}"),
            CoordId::Extended => "pe".to_string(),
            CoordId::Velocity { a, nu } => format!("v{a}_{nu}"),
            CoordId::SecondJet { a, nu, eta } => format!("y{a}_{nu}_{eta}"),
            CoordId::Param(k) => format!("s{k}"),
        }
    }

    /// LaTeX rendering with the usual index placement (`p^{ν}_{A}`, `v^{A}_{ν}`).
    pub fn latex(&self) -> String {
        match *self {
            CoordId::Base(nu) => format!("x^{{{nu}}}"),
            CoordId::Fiber(a) => format!("y^{{{a}}}"),
            CoordId::Momentum { a, nu } => format!("p^{{{nu}}}_{{{a}}}"),
            CoordId::Extended => "p".to_string(),
            CoordId::Velocity { a, nu } => format!("v^{{{a}}}_{{{nu}}}"),
            CoordId::SecondJet { a, nu, eta } => format!("y^{{{a}}}_{{{nu}{eta}}}"),
            CoordId::Param(k) => format!("s_{{{k}}}"),
        }
    }

    /// Parse a coordinate name (`x2`, `y1`, `p1_2`, `pe`, `v1_1`, `y1_1_2`, `s3`).
    /// Index ranges are not checked here; charts do that.
    pub fn parse_name(name: &str) -> Option<Self> {
        if name == "pe" {
            return Some(CoordId::Extended);
        }
        let (head, rest) = name.split_at(name.find(|c: char| c.is_ascii_digit())?);
        let parts: Vec<&str> = rest.split('_').collect();
        let nums: Option<Vec<u8>> = parts
            .iter()
            .map(|s| {
                if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || s.starts_with('0') {
                    None
                } else {
                    s.parse::<u8>().ok()
                }
            })
            .collect();
        let nums = nums?;
        match (head, nums.as_slice()) {
            ("x", [nu]) => Some(CoordId::Base(*nu)),
            ("y", [a]) => Some(CoordId::Fiber(*a)),
            ("p", [a, nu]) => Some(CoordId::Momentum { a: *a, nu: *nu }),
            ("v", [a, nu]) => Some(CoordId::Velocity { a: *a, nu: *nu }),
            ("y", [a, nu, eta]) if nu <= eta => Some(CoordId::SecondJet {
                a: *a,
                nu: *nu,
                eta: *eta,
            }),
            ("s", [k]) => Some(CoordId::Param(*k)),
            _ => None,
        }
    }
}

impl fmt::Display for CoordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
