//! Independent reference computations checked against the library.

mod common;

use common::*;
use ergopl_core::*;
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

/// `Σ |f(t_{i+1}) − f(t_i)|` over a partition.
fn partition_sum(f: &PwlFunction, ts: &[Rational]) -> Rational {
    ts.windows(2)
        .map(|w| (f.evaluate(&w[1]).unwrap() - f.evaluate(&w[0]).unwrap()).abs())
        .sum()
}

/// Largest difference quotient over all pairs of breakpoints.
fn pairwise_lipschitz(f: &PwlFunction) -> Rational {
    let pts: Vec<_> = f.points().collect();
    let mut best = Rational::zero();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let q = ((pts[j].1 - pts[i].1) / (pts[j].0 - pts[i].0)).abs();
            if q > best {
                best = q;
            }
        }
    }
    best
}

/// Searches all pairs of support points for a valid mass ordering.
fn exhaustive_mass_ordering(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Option<(Rational, Rational, MassDirection)> {
    let mut pts: Vec<Rational> = m1.positions().iter().chain(m2.positions()).cloned().collect();
    pts.sort();
    for a in &pts {
        for b in pts.iter().filter(|b| *b > a) {
            for dir in [MassDirection::FirstBelowSecond, MassDirection::SecondBelowFirst] {
                if mass_ordering_holds(m1, m2, a, b, dir) {
                    return Some((a.clone(), b.clone(), dir));
                }
            }
        }
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn variation_is_breakpoint_partition_sum(f in pwl_function()) {
        prop_assert_eq!(f.variation(), partition_sum(&f, f.breakpoints()));
    }

    #[test]
    fn variation_dominates_coarser_partitions(f in pwl_function(), cuts in btree_set(1i64..997, 0..10)) {
        let mut ts = vec![Rational::zero()];
        ts.extend(cuts.into_iter().map(|k| Rational::new(k, 997)));
        ts.push(Rational::one());
        prop_assert!(partition_sum(&f, &ts) <= f.variation());
    }

    #[test]
    fn lipschitz_is_max_difference_quotient(f in pwl_function()) {
        prop_assert_eq!(f.lipschitz_constant(), pairwise_lipschitz(&f));
    }

    #[test]
    fn mass_ordering_agrees_with_exhaustive_search((m1, m2) in disjoint_pair(20)) {
        let found = mass_ordering(&m1, &m2).unwrap();
        prop_assert!(found.holds_for(&m1, &m2));
        prop_assert!(exhaustive_mass_ordering(&m1, &m2).is_some());
    }

    #[test]
    fn wasserstein_matches_quantile_coupling(xs in vec(unit_rational(), 1..12), ys in vec(unit_rational(), 1..12)) {
        // Equal-weight empirical measures with a common sample count: the
        // optimal coupling pairs sorted samples.
        let n = xs.len() * ys.len();
        let mut a: Vec<Rational> = xs.iter().flat_map(|x| std::iter::repeat_n(x.clone(), ys.len())).collect();
        let mut b: Vec<Rational> = ys.iter().flat_map(|y| std::iter::repeat_n(y.clone(), xs.len())).collect();
        a.sort();
        b.sort();
        let cost: Rational = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<Rational>() / Rational::from_integer(n as i64);
        let ma = DiscreteMeasure::empirical(xs).unwrap();
        let mb = DiscreteMeasure::empirical(ys).unwrap();
        prop_assert_eq!(wasserstein1(&ma, &mb), cost);
    }
}

#[test]
fn tent_iterates_double_their_variation() {
    let tent = pwl(&[("0", "0"), ("1/2", "1"), ("1", "0")]);
    let sys = FunctionSystem::uniform(vec![tent]).unwrap();
    let trace = sys.variation_trace(&sys.word(vec![0; 6]).unwrap()).unwrap();
    let expected: Vec<Rational> = (1..=6).map(|n| Rational::from_integer(1 << n)).collect();
    assert_eq!(trace.variations, expected);
}

#[test]
fn halves_system_injectivity_and_fixed_law() {
    let sys = FunctionSystem::uniform(vec![pwl(&[("0", "0"), ("1", "1/2")]), pwl(&[("0", "1/2"), ("1", "1")])]).unwrap();
    let rep = check_mu_injective(&sys).unwrap();
    assert!(rep.injective);
    assert_eq!(rep.generic_max_integral, r("1/2"));
    // The uniform law on a dyadic grid is mapped to the next finer grid.
    let grid = DiscreteMeasure::dyadic_midpoints(4);
    let pushed = grid.pushforward(&sys);
    assert_eq!(pushed, DiscreteMeasure::dyadic_midpoints(5).clone());
}

#[test]
fn tableaux_fixture_matches_hand_computation() {
    let (sys, cover) = build_tableaux_example();
    let cert = verify_tableaux(&sys, &cover).unwrap();
    assert_eq!(cert.variation_bound, r("16"));
    assert!(cert.recheck(&sys).is_ok());
    // Each map's variation is read off its five points.
    let tv: Vec<Rational> = sys.maps().iter().map(PwlFunction::variation).collect();
    assert_eq!(tv, vec![r("1/2"), r("3/4"), r("7/8")]);
    assert!(check_corner_crossing(&sys, &cover).unwrap().holds);
}

#[test]
fn compensation_level_variations_match_closed_form() {
    let pair = build_compensation(&CompensationParams::default()).unwrap();
    let closed_form = |n: u32| {
        let m = 5i64.pow(n);
        Rational::from_integer(2 * m - 1) * r("1/4").pow(n + 1)
    };
    for lvl in &pair.levels {
        let n = lvl.n as u32;
        assert_eq!(pair.f1.total_variation(&lvl.interval_i()), closed_form(n));
        assert_eq!(partition_sum(&pair.f1, &{
            let mut ts: Vec<Rational> = pair.f1.breakpoints().iter().filter(|x| lvl.interval_i().contains(x)).cloned().collect();
            ts.dedup();
            ts
        }), closed_form(n));
    }
}

#[test]
fn identity_system_fails_u_conditions_everywhere() {
    let sys = FunctionSystem::uniform(vec![PwlFunction::identity()]).unwrap();
    let rep = check_u_conditions(&sys);
    assert!(!rep.u1 && !rep.u2);
    let w = rep.u1_witness.unwrap();
    assert!(w.is_positive() && w < Rational::one());
}
