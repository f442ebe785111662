//! Seeded random Hamiltonians and gauges for property suites.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::geometry::BundleChart;
use crate::symbolic::{simplify, CoordId, Expr};

use super::gauge::{GaugeChoice, GaugeKey};

fn random_coefficient<R: Rng>(rng: &mut R) -> Expr {
    let num = *[-3i64, -2, -1, 1, 2, 3].choose(rng).unwrap();
    let den = *[1i64, 1, 2, 3].choose(rng).unwrap();
    Expr::ratio(num, den)
}

fn random_monomial<R: Rng>(rng: &mut R, coords: &[CoordId], max_degree: usize) -> Expr {
    if coords.is_empty() {
        return Expr::one();
    }
    let degree = rng.gen_range(0..=max_degree);
    Expr::product((0..degree).map(|_| Expr::var(*coords.choose(rng).unwrap())).collect())
}

/// Polynomial Hamiltonian with total degree ≤ 3 in the multimomenta, ≤ 2 in
/// the fiber coordinates and optionally base-dependent coefficients.
pub fn random_hamiltonian<R: Rng>(rng: &mut R, chart: BundleChart) -> Expr {
    let xs = chart.base_coords();
    let ys = chart.fiber_coords();
    let ps = chart.momentum_coords();
    let terms = rng.gen_range(2..=5);
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut factors = vec![random_coefficient(rng)];
        if rng.gen_bool(0.4) {
            factors.push(random_monomial(rng, &xs, 1));
        }
        factors.push(random_monomial(rng, &ys, 2));
        factors.push(random_monomial(rng, &ps, 3));
        out.push(Expr::product(factors));
    }
    simplify(&Expr::sum(out))
}

/// Low-degree polynomial on the restricted bundle.
pub fn random_gauge_function<R: Rng>(rng: &mut R, chart: BundleChart) -> Expr {
    let mut coords = chart.base_coords();
    coords.extend(chart.fiber_coords());
    coords.extend(chart.momentum_coords());
    let terms = rng.gen_range(1..=2);
    let out: Vec<Expr> = (0..terms)
        .map(|_| random_coefficient(rng) * random_monomial(rng, &coords, 2))
        .collect();
    simplify(&Expr::sum(out))
}

/// Either a full user table or an equal split with a random overlay.
pub fn random_gauge<R: Rng>(rng: &mut R, chart: BundleChart) -> GaugeChoice {
    let keys = GaugeChoice::free_keys(chart);
    if rng.gen_bool(0.5) {
        let table: BTreeMap<GaugeKey, Expr> = keys
            .into_iter()
            .map(|k| (k, random_gauge_function(rng, chart)))
            .collect();
        GaugeChoice::user_table(table)
    } else {
        let mut table = BTreeMap::new();
        for k in keys {
            if rng.gen_bool(0.5) {
                table.insert(k, random_gauge_function(rng, chart));
            }
        }
        GaugeChoice::equal_split_with(table)
    }
}

/// `count` random Hamiltonians from a fixed seed.
pub fn hamiltonian_corpus(chart: BundleChart, seed: u64, count: usize) -> Vec<Expr> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_hamiltonian(&mut rng, chart)).collect()
}

/// `count` random gauges from a fixed seed.
pub fn gauge_corpus(chart: BundleChart, seed: u64, count: usize) -> Vec<GaugeChoice> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_gauge(&mut rng, chart)).collect()
}
