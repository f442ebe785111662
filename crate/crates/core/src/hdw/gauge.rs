//! Parametrization of the free functions left by the momentum-coefficient
//! system.

use std::collections::BTreeMap;
use std::fmt;

use crate::geometry::{Bundle, BundleChart};
use crate::symbolic::{simplify, Expr};

use super::HdwError;

/// One free function of the momentum coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GaugeKey {
    /// `G^rho_{A nu}` with `rho != nu`.
    OffTrace { a: usize, rho: usize, nu: usize },
    /// Trace redistribution `psi^nu_A`, `nu < m`; `psi^m_A` is eliminated.
    Redistribution { a: usize, nu: usize },
}

impl GaugeKey {
    /// Parse `G[A][rho][nu]` or `psi[A][nu]`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let (head, rest) = s.split_at(s.find('[')?);
        let mut idx = Vec::new();
        let mut rest = rest;
        while !rest.is_empty() {
            let close = rest.find(']')?;
            if !rest.starts_with('[') {
                return None;
            }
            idx.push(rest[1..close].trim().parse::<usize>().ok()?);
            rest = &rest[close + 1..];
        }
        match (head, idx.as_slice()) {
            ("G", [a, rho, nu]) => Some(GaugeKey::OffTrace {
                a: *a,
                rho: *rho,
                nu: *nu,
            }),
            ("psi", [a, nu]) => Some(GaugeKey::Redistribution { a: *a, nu: *nu }),
            _ => None,
        }
    }

    fn is_valid_for(&self, chart: BundleChart) -> bool {
        let (m, n) = (chart.m(), chart.n());
        match *self {
            GaugeKey::OffTrace { a, rho, nu } => {
                (1..=n).contains(&a) && (1..=m).contains(&rho) && (1..=m).contains(&nu) && rho != nu
            }
            GaugeKey::Redistribution { a, nu } => (1..=n).contains(&a) && (1..m).contains(&nu),
        }
    }
}

impl GaugeMode {
    pub fn label(self) -> &'static str {
        match self {
            GaugeMode::EqualSplit => "equal-split",
            GaugeMode::UserTable => "user-table",
        }
    }
}

impl fmt::Display for GaugeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeKey::OffTrace { a, rho, nu } => write!(f, "G[{a}][{rho}][{nu}]"),
            GaugeKey::Redistribution { a, nu } => write!(f, "psi[{a}][{nu}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeMode {
    /// Trace split evenly, off-trace zero; table entries overlay the default.
    EqualSplit,
    /// Every free function given explicitly.
    UserTable,
}

/// A choice of the `n(m²−1)` free functions.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeChoice {
    mode: GaugeMode,
    table: BTreeMap<GaugeKey, Expr>,
}

impl GaugeChoice {
    pub fn equal_split() -> Self {
        GaugeChoice {
            mode: GaugeMode::EqualSplit,
            table: BTreeMap::new(),
        }
    }

    /// Equal split with some free functions overridden.
    pub fn equal_split_with(table: BTreeMap<GaugeKey, Expr>) -> Self {
        GaugeChoice {
            mode: GaugeMode::EqualSplit,
            table,
        }
    }

    pub fn user_table(table: BTreeMap<GaugeKey, Expr>) -> Self {
        GaugeChoice {
            mode: GaugeMode::UserTable,
            table,
        }
    }

    pub fn mode(&self) -> GaugeMode {
        self.mode
    }

    pub fn table(&self) -> &BTreeMap<GaugeKey, Expr> {
        &self.table
    }

    pub fn entry(&self, key: GaugeKey) -> Expr {
        self.table.get(&key).cloned().unwrap_or_else(Expr::zero)
    }

    /// All free-function slots for a chart, in table order.
    pub fn free_keys(chart: BundleChart) -> Vec<GaugeKey> {
        let (m, n) = (chart.m(), chart.n());
        let mut keys = Vec::new();
        for a in 1..=n {
            for rho in 1..=m {
                for nu in 1..=m {
                    if rho != nu {
                        keys.push(GaugeKey::OffTrace { a, rho, nu });
                    }
                }
            }
            for nu in 1..m {
                keys.push(GaugeKey::Redistribution { a, nu });
            }
        }
        keys
    }

    pub fn validate(&self, chart: BundleChart) -> Result<(), HdwError> {
        for (key, e) in &self.table {
            if !key.is_valid_for(chart) {
                return Err(HdwError::UnknownGaugeKey {
                    key: key.to_string(),
                    m: chart.m(),
                    n: chart.n(),
                });
            }
            for c in e.free_vars() {
                if !chart.contains(c, Bundle::Restricted) {
                    return Err(HdwError::GaugeCoordinate {
                        key: key.to_string(),
                        coord: c,
                    });
                }
            }
        }
        let expected = dof_count(chart);
        if self.mode == GaugeMode::UserTable && self.table.len() != expected {
            return Err(HdwError::GaugeCardinality {
                expected,
                got: self.table.len(),
            });
        }
        Ok(())
    }

    /// Trace redistribution `psi^nu_A` including the eliminated last entry.
    fn redistribution(&self, chart: BundleChart, a: usize, nu: usize) -> Expr {
        let m = chart.m();
        if nu < m {
            self.entry(GaugeKey::Redistribution { a, nu })
        } else {
            -Expr::sum(
                (1..m)
                    .map(|k| self.entry(GaugeKey::Redistribution { a, nu: k }))
                    .collect(),
            )
        }
    }

    /// Momentum coefficients `G^rho_{A nu}` keyed by `(A, rho, nu)`, given
    /// `∂h/∂y^A` for each `A`.
    pub(crate) fn momentum_coefficients(
        &self,
        chart: BundleChart,
        dh_dy: &[Expr],
    ) -> BTreeMap<(usize, usize, usize), Expr> {
        let m = chart.m();
        let share = Expr::ratio(-1, m as i64);
        let mut out = BTreeMap::new();
        for a in 1..=chart.n() {
            for rho in 1..=m {
                for nu in 1..=m {
                    let g = if rho == nu {
                        &share * &dh_dy[a - 1] + self.redistribution(chart, a, nu)
                    } else {
                        self.entry(GaugeKey::OffTrace { a, rho, nu })
                    };
                    out.insert((a, rho, nu), simplify(&g));
                }
            }
        }
        out
    }
}

impl Default for GaugeChoice {
    fn default() -> Self {
        GaugeChoice::equal_split()
    }
}

/// Number of free functions in the general solution: `n(m²−1)`.
pub fn dof_count(chart: BundleChart) -> usize {
    chart.n() * (chart.m() * chart.m() - 1)
}
