#![allow(dead_code)]

use ergopl_core::{DiscreteMeasure, PwlFunction, Rational};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

pub fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn pwl(pts: &[(&str, &str)]) -> PwlFunction {
    PwlFunction::from_points(pts.iter().map(|(x, y)| (r(x), r(y)))).unwrap()
}

/// Values `k/den` with a denominator drawn from a mix of small and awkward ones.
pub fn unit_rational() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(2i64), Just(7), Just(64), Just(97), Just(1000)]
        .prop_flat_map(|den| (0..=den).prop_map(move |k| Rational::new(k, den)))
}

pub fn interior_rational() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(2i64), Just(7), Just(64), Just(97), Just(1000)]
        .prop_flat_map(|den| (1..den).prop_map(move |k| Rational::new(k, den)))
}

/// Random continuous piecewise-linear self-map of `[0, 1]` with up to 8 breakpoints.
pub fn pwl_function() -> impl Strategy<Value = PwlFunction> {
    let yden = prop_oneof![Just(1i64), Just(3), Just(8), Just(97)];
    (btree_set(1i64..48, 0..7), yden).prop_flat_map(|(interior, yden)| {
        let n = interior.len() + 2;
        (Just(interior), vec(0..=yden, n), Just(yden)).prop_map(|(interior, ks, yden)| {
            let xs = std::iter::once(Rational::zero())
                .chain(interior.iter().map(|&k| Rational::new(k, 48)))
                .chain(std::iter::once(Rational::one()));
            PwlFunction::from_points(xs.zip(ks.into_iter().map(|k| Rational::new(k, yden)))).unwrap()
        })
    })
}

pub fn monotone_function() -> impl Strategy<Value = PwlFunction> {
    (btree_set(1i64..48, 0..7), any::<bool>()).prop_flat_map(|(interior, up)| {
        let n = interior.len() + 2;
        (Just(interior), vec(0i64..=20, n), Just(up)).prop_map(|(interior, mut ks, up)| {
            ks.sort_unstable();
            if !up {
                ks.reverse();
            }
            let xs = std::iter::once(Rational::zero())
                .chain(interior.iter().map(|&k| Rational::new(k, 48)))
                .chain(std::iter::once(Rational::one()));
            PwlFunction::from_points(xs.zip(ks.into_iter().map(|k| Rational::new(k, 20)))).unwrap()
        })
    })
}

fn measure_from(atoms: Vec<(i64, i64)>, den: i64) -> DiscreteMeasure {
    let total: i64 = atoms.iter().map(|(_, m)| m).sum();
    DiscreteMeasure::from_weighted_atoms(
        atoms
            .into_iter()
            .map(|(k, m)| (Rational::new(k, den), Rational::new(m, total)))
            .collect(),
    )
    .unwrap()
}

/// A probability measure with up to `max_atoms` atoms on the grid `k/60`.
pub fn discrete_measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    vec((0i64..=60, 1i64..10), 1..=max_atoms).prop_map(|atoms| measure_from(atoms, 60))
}

/// Two measures with disjoint supports, at most `max_atoms` atoms each.
pub fn disjoint_pair(max_atoms: usize) -> impl Strategy<Value = (DiscreteMeasure, DiscreteMeasure)> {
    btree_set(0i64..=120, 2..=2 * max_atoms)
        .prop_flat_map(|pos| {
            let n = pos.len();
            let pos: Vec<i64> = pos.into_iter().collect();
            (Just(pos), vec(any::<bool>(), n), vec(1i64..10, n), 0..n)
        })
        .prop_map(move |(pos, side, mass, pivot)| {
            let mut first = Vec::new();
            let mut second = Vec::new();
            for (i, ((p, s), m)) in pos.iter().zip(&side).zip(&mass).enumerate() {
                // Force both sides to be nonempty.
                let to_first = if i == pivot { true } else if i == (pivot + 1) % pos.len() { false } else { *s };
                let bucket = if to_first { &mut first } else { &mut second };
                if bucket.len() < max_atoms {
                    bucket.push((*p, *m));
                }
            }
            (measure_from(first, 120), measure_from(second, 120))
        })
}
