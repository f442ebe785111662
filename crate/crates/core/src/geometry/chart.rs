use std::fmt;

use serde::{Deserialize, Serialize};

use crate::symbolic::{CoordId, Expr, SymbolicError};

/// The bundle level a coordinate set or form lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bundle {
    /// `E → M`, coordinates `(x, y)`.
    Configuration,
    /// First jet bundle `J¹π`, coordinates `(x, y, v)`.
    Jet,
    /// Restricted multimomentum bundle `J¹π*`, coordinates `(x, y, p^ν_A)`.
    Restricted,
    /// Extended multimomentum bundle `Mπ`, coordinates `(x, y, p^ν_A, p)`.
    Extended,
    /// Parameter space of an embedded submanifold with the given dimension.
    Parameters(usize),
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bundle::Configuration => f.write_str("E"),
            Bundle::Jet => f.write_str("J1pi"),
            Bundle::Restricted => f.write_str("J1pi*"),
            Bundle::Extended => f.write_str("Mpi"),
            Bundle::Parameters(k) => write!(f, "parameter space (dim {k})"),
        }
    }
}

/// Dimensions of the fiber bundle `E → M` and the natural coordinates of
/// every bundle built over it. There is a single global chart per bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BundleChart {
    m: usize,
    n: usize,
}

pub const MAX_DIMENSION: usize = 16;

impl BundleChart {
    pub fn new(m: usize, n: usize) -> Result<Self, String> {
        if m == 0 || n == 0 {
            return Err(format!("bundle dimensions must be >= 1 (got m={m}, n={n})"));
        }
        if m > MAX_DIMENSION || n > MAX_DIMENSION {
            return Err(format!(
                "bundle dimensions must be <= {MAX_DIMENSION} (got m={m}, n={n})"
            ));
        }
        Ok(BundleChart { m, n })
    }

    /// Base dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Fiber dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base_coords(&self) -> Vec<CoordId> {
        (1..=self.m).map(CoordId::x).collect()
    }

    pub fn fiber_coords(&self) -> Vec<CoordId> {
        (1..=self.n).map(CoordId::y).collect()
    }

    pub fn momentum_coords(&self) -> Vec<CoordId> {
        let mut out = Vec::with_capacity(self.n * self.m);
        for a in 1..=self.n {
            for nu in 1..=self.m {
                out.push(CoordId::p(a, nu));
            }
        }
        out
    }

    pub fn velocity_coords(&self) -> Vec<CoordId> {
        let mut out = Vec::with_capacity(self.n * self.m);
        for a in 1..=self.n {
            for nu in 1..=self.m {
                out.push(CoordId::v(a, nu));
            }
        }
        out
    }

    /// Coordinates of a bundle level in the total order used for wedge bases.
    pub fn coords(&self, bundle: Bundle) -> Vec<CoordId> {
        match bundle {
            Bundle::Configuration => [self.base_coords(), self.fiber_coords()].concat(),
            Bundle::Jet => [self.base_coords(), self.fiber_coords(), self.velocity_coords()].concat(),
            Bundle::Restricted => [self.base_coords(), self.fiber_coords(), self.momentum_coords()].concat(),
            Bundle::Extended => [
                self.base_coords(),
                self.fiber_coords(),
                self.momentum_coords(),
                vec![CoordId::pe()],
            ]
            .concat(),
            Bundle::Parameters(k) => (1..=k).map(CoordId::param).collect(),
        }
    }

    pub fn contains(&self, c: CoordId, bundle: Bundle) -> bool {
        let (m, n) = (self.m as u8, self.n as u8);
        let base = |nu: u8| (1..=m).contains(&nu);
        let fiber = |a: u8| (1..=n).contains(&a);
        match (c, bundle) {
            (CoordId::Param(k), Bundle::Parameters(dim)) => (1..=dim as u8).contains(&k),
            (_, Bundle::Parameters(_)) => false,
            (CoordId::Base(nu), _) => base(nu),
            (CoordId::Fiber(a), _) => fiber(a),
            (CoordId::Momentum { a, nu }, Bundle::Restricted | Bundle::Extended) => fiber(a) && base(nu),
            (CoordId::Extended, Bundle::Extended) => true,
            (CoordId::Velocity { a, nu }, Bundle::Jet) => fiber(a) && base(nu),
            _ => false,
        }
    }

    pub fn check_coord(&self, c: CoordId, bundle: Bundle) -> Result<(), SymbolicError> {
        if self.contains(c, bundle) {
            Ok(())
        } else {
            Err(SymbolicError::ChartMismatch {
                coord: c,
                bundle,
                m: self.m,
                n: self.n,
            })
        }
    }

    pub fn check_expr(&self, e: &Expr, bundle: Bundle) -> Result<(), SymbolicError> {
        e.free_vars().into_iter().try_for_each(|c| self.check_coord(c, bundle))
    }

    /// Total coordinate count of a bundle level.
    pub fn dimension(&self, bundle: Bundle) -> usize {
        let (m, n) = (self.m, self.n);
        match bundle {
            Bundle::Configuration => m + n,
            Bundle::Jet | Bundle::Restricted => m + n + n * m,
            Bundle::Extended => m + n + n * m + 1,
            Bundle::Parameters(k) => k,
        }
    }
}
