//! Exact checkers for sufficient conditions: tableaux coverings and their
//! corner-crossing special case, μ-injectivity, and the one-sided drift
//! conditions 𝔘₁ / 𝔘₂.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::pwl::{lower_envelope, nonnegative_witness, upper_envelope, Interval, PwlFunction};
use crate::rational::Rational;
use crate::system::FunctionSystem;

/// Closed intervals with nonempty interiors whose union is `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalCovering {
    intervals: Vec<Interval>,
}

impl IntervalCovering {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(invalid("a covering needs at least one interval"));
        }
        if let Some(i) = intervals.iter().find(|i| !i.has_interior()) {
            return Err(invalid(format!("covering interval {i:?} has empty interior")));
        }
        let mut sorted: Vec<&Interval> = intervals.iter().collect();
        sorted.sort_by(|a, b| a.lo().cmp(b.lo()));
        let mut reach = Rational::zero();
        for i in sorted {
            if *i.lo() > reach {
                return Err(invalid(format!("the covering leaves a gap ({reach}, {})", i.lo())));
            }
            if *i.hi() > reach {
                reach = i.hi().clone();
            }
        }
        if reach != Rational::one() {
            return Err(invalid(format!("the covering stops at {reach}")));
        }
        Ok(IntervalCovering { intervals })
    }

    /// A covering whose intervals overlap at most in endpoints.
    pub fn partition(intervals: Vec<Interval>) -> Result<Self> {
        let c = IntervalCovering::new(intervals)?;
        c.check_essential_partition()?;
        Ok(c)
    }

    pub fn check_essential_partition(&self) -> Result<()> {
        let mut sorted: Vec<&Interval> = self.intervals.iter().collect();
        sorted.sort_by(|a, b| a.lo().cmp(b.lo()));
        for w in sorted.windows(2) {
            if w[1].lo() < w[0].hi() {
                return Err(invalid(format!(
                    "intervals {:?} and {:?} overlap with positive length",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Why a `(map, interval)` pair fails the tableaux hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationReason {
    /// The map turns around at `turning_point` inside the interval.
    NonMonotone { turning_point: Rational },
    /// The image fits in no interval of the covering.
    ImageNotContained { image: Box<Interval> },
    /// The certificate's table or bound does not match the covering.
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableauxViolation {
    pub map: usize,
    pub interval: usize,
    pub reason: ViolationReason,
}

/// Witness that a system is a tableaux system for `covering`: every map is
/// monotone on every `I` and `g(I) ⊆ φ_g(I)`. Then `V_n ≤ |ℐ|²` for every word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringCertificate {
    pub covering: IntervalCovering,
    /// `phi[g][i]` is the index of the interval receiving `g(I_i)`.
    pub phi: Vec<Vec<usize>>,
    pub variation_bound: Rational,
}

fn check_cell(g: &PwlFunction, map: usize, interval: usize, cell: &Interval) -> Result<Interval, TableauxViolation> {
    if let Some(turning_point) = g.monotonicity_violation(cell) {
        return Err(TableauxViolation {
            map,
            interval,
            reason: ViolationReason::NonMonotone { turning_point },
        });
    }
    Ok(g.image(cell))
}

/// Checks the tableaux hypotheses for every map and interval, choosing the
/// lowest-index receiving interval when several fit.
pub fn verify_tableaux(
    system: &FunctionSystem,
    covering: &IntervalCovering,
) -> Result<CoveringCertificate, TableauxViolation> {
    let mut phi = Vec::with_capacity(system.len());
    for (gi, g) in system.maps().iter().enumerate() {
        let mut row = Vec::with_capacity(covering.len());
        for (ii, cell) in covering.intervals().iter().enumerate() {
            let image = check_cell(g, gi, ii, cell)?;
            match covering.intervals().iter().position(|j| j.contains_interval(&image)) {
                Some(j) => row.push(j),
                None => {
                    return Err(TableauxViolation {
                        map: gi,
                        interval: ii,
                        reason: ViolationReason::ImageNotContained { image: Box::new(image) },
                    })
                }
            }
        }
        phi.push(row);
    }
    let m = Rational::from_integer(covering.len() as i64);
    Ok(CoveringCertificate {
        covering: covering.clone(),
        phi,
        variation_bound: &m * &m,
    })
}

impl CoveringCertificate {
    /// Re-verifies every stored entry against `system` without searching.
    pub fn recheck(&self, system: &FunctionSystem) -> Result<(), TableauxViolation> {
        let cells = self.covering.intervals();
        let shape_ok = self.phi.len() == system.len()
            && self.phi.iter().all(|row| row.len() == cells.len() && row.iter().all(|&j| j < cells.len()));
        if !shape_ok {
            return Err(TableauxViolation {
                map: 0,
                interval: 0,
                reason: ViolationReason::Malformed,
            });
        }
        for (gi, (g, row)) in system.maps().iter().zip(&self.phi).enumerate() {
            for (ii, (cell, &j)) in cells.iter().zip(row).enumerate() {
                let image = check_cell(g, gi, ii, cell)?;
                if !cells[j].contains_interval(&image) {
                    return Err(TableauxViolation {
                        map: gi,
                        interval: ii,
                        reason: ViolationReason::ImageNotContained { image: Box::new(image) },
                    });
                }
            }
        }
        let m = Rational::from_integer(cells.len() as i64);
        if self.variation_bound != &m * &m {
            return Err(TableauxViolation {
                map: 0,
                interval: 0,
                reason: ViolationReason::Malformed,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrossingKind {
    NonMonotone,
    /// The graph passes the band boundary `boundary` away from a grid corner.
    InteriorCrossing { boundary: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingWitness {
    pub map: usize,
    pub x: Rational,
    pub kind: CrossingKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingReport {
    pub holds: bool,
    pub witness: Option<CrossingWitness>,
}

/// Smallest `x` in `cell` with `g(x) = level`, for monotone `g` on `cell`.
fn first_level_crossing(g: &PwlFunction, cell: &Interval, level: &Rational) -> Option<Rational> {
    let mut pts: Vec<(Rational, Rational)> = Vec::new();
    pts.push((cell.lo().clone(), g.eval_in_unit(cell.lo())));
    for (x, y) in g.points().filter(|(x, _)| *x > cell.lo() && *x < cell.hi()) {
        pts.push((x.clone(), y.clone()));
    }
    pts.push((cell.hi().clone(), g.eval_in_unit(cell.hi())));
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
        if y0 == level {
            return Some(x0.clone());
        }
        if (y0 < level) != (y1 < level) && y1 != level {
            return Some(x0 + (level - y0) * (x1 - x0) / (y1 - y0));
        }
        if y1 == level {
            return Some(x1.clone());
        }
    }
    None
}

/// Checks that every map is monotone on each cell of an essential partition
/// and that its graph moves between horizontal bands only at grid corners.
pub fn check_corner_crossing(system: &FunctionSystem, partition: &IntervalCovering) -> Result<CrossingReport> {
    partition.check_essential_partition()?;
    let mut boundaries: Vec<Rational> = partition
        .intervals()
        .iter()
        .flat_map(|i| [i.lo().clone(), i.hi().clone()])
        .filter(|c| c.is_positive() && *c < Rational::one())
        .collect();
    boundaries.sort();
    boundaries.dedup();
    let mut cells: Vec<&Interval> = partition.intervals().iter().collect();
    cells.sort_by(|a, b| a.lo().cmp(b.lo()));
    for (gi, g) in system.maps().iter().enumerate() {
        for cell in &cells {
            if let Some(x) = g.monotonicity_violation(cell) {
                return Ok(CrossingReport {
                    holds: false,
                    witness: Some(CrossingWitness {
                        map: gi,
                        x,
                        kind: CrossingKind::NonMonotone,
                    }),
                });
            }
            let (a, b) = (g.eval_in_unit(cell.lo()), g.eval_in_unit(cell.hi()));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let crossing = boundaries
                .iter()
                .filter(|c| **c > lo && **c < hi)
                .filter_map(|c| first_level_crossing(g, cell, c).map(|x| (x, c.clone())))
                .min_by(|p, q| p.0.cmp(&q.0));
            if let Some((x, boundary)) = crossing {
                return Ok(CrossingReport {
                    holds: false,
                    witness: Some(CrossingWitness {
                        map: gi,
                        x,
                        kind: CrossingKind::InteriorCrossing { boundary },
                    }),
                });
            }
        }
    }
    Ok(CrossingReport {
        holds: true,
        witness: None,
    })
}

/// Outcome of the μ-injectivity check `Σ_g μ(g)·#g⁻¹(y) ≤ 1 for all y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuInjectivityReport {
    pub injective: bool,
    /// Maximum of the integral over all `y ∈ [0, 1]` and the lowest level attaining it.
    pub max_integral: Rational,
    pub max_level: Rational,
    /// Maximum over levels that are not images of breakpoints; the integral
    /// takes this value on a set of positive length.
    pub generic_max_integral: Rational,
    pub generic_max_level: Rational,
}

fn preimage_integral(system: &FunctionSystem, y: &Rational) -> Rational {
    system
        .maps()
        .iter()
        .zip(system.weights())
        .map(|(g, w)| {
            let n = g.preimage_count(y).expect("level in [0, 1]").components();
            w * Rational::from_integer(n as i64)
        })
        .sum()
}

/// Evaluates the preimage integral at every critical level (images of
/// breakpoints, plus 0 and 1) and at one midpoint per gap between them; the
/// integral is constant on each open gap.
pub fn check_mu_injective(system: &FunctionSystem) -> Result<MuInjectivityReport> {
    for (g, label) in system.maps().iter().zip(system.labels()) {
        if let Some(flat) = g.flat_segments().next() {
            return Err(Error::FlatSegment {
                label: label.clone(),
                span: Box::new((flat.lo().clone(), flat.hi().clone())),
            });
        }
    }
    let mut levels: Vec<Rational> = system.maps().iter().flat_map(|g| g.values().iter().cloned()).collect();
    levels.push(Rational::zero());
    levels.push(Rational::one());
    levels.sort();
    levels.dedup();
    let mut best: Option<(Rational, Rational)> = None;
    let mut generic: Option<(Rational, Rational)> = None;
    let better = |slot: &Option<(Rational, Rational)>, v: &Rational| slot.as_ref().is_none_or(|(b, _)| v > b);
    for (i, y) in levels.iter().enumerate() {
        let v = preimage_integral(system, y);
        if better(&best, &v) {
            best = Some((v, y.clone()));
        }
        if let Some(next) = levels.get(i + 1) {
            let mid = y.midpoint(next);
            let v = preimage_integral(system, &mid);
            if better(&best, &v) {
                best = Some((v.clone(), mid.clone()));
            }
            if better(&generic, &v) {
                generic = Some((v, mid));
            }
        }
    }
    let (max_integral, max_level) = best.expect("at least one level");
    let (generic_max_integral, generic_max_level) = generic.expect("0 and 1 are distinct levels");
    Ok(MuInjectivityReport {
        injective: max_integral <= Rational::one(),
        max_integral,
        max_level,
        generic_max_integral,
        generic_max_level,
    })
}

/// Whether some map moves every interior point strictly down (𝔘₁) or
/// strictly up (𝔘₂), with a point of `(0, 1)` witnessing each failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UReport {
    pub u1: bool,
    pub u2: bool,
    pub u1_witness: Option<Rational>,
    pub u2_witness: Option<Rational>,
}

/// Decides 𝔘₁ via the sign of `min_g g(x) - x` and 𝔘₂ via `x - max_g g(x)`
/// on the open interval `(0, 1)`.
pub fn check_u_conditions(system: &FunctionSystem) -> UReport {
    let low = lower_envelope(system.maps()).expect("nonempty system");
    let high = upper_envelope(system.maps()).expect("nonempty system");
    let u1_witness = nonnegative_witness(low.breakpoints(), &low.minus_identity(), false, false);
    let u2_witness = nonnegative_witness(high.breakpoints(), &high.identity_minus(), false, false);
    UReport {
        u1: u1_witness.is_none(),
        u2: u2_witness.is_none(),
        u1_witness,
        u2_witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn pwl(pts: &[(&str, &str)]) -> PwlFunction {
        PwlFunction::from_points(pts.iter().map(|(x, y)| (r(x), r(y)))).unwrap()
    }

    fn iv(a: &str, b: &str) -> Interval {
        Interval::new(r(a), r(b)).unwrap()
    }

    fn halves() -> IntervalCovering {
        IntervalCovering::partition(vec![iv("0", "1/2"), iv("1/2", "1")]).unwrap()
    }

    fn tent() -> PwlFunction {
        pwl(&[("0", "0"), ("1/2", "1"), ("1", "0")])
    }

    #[test]
    fn covering_validation() {
        assert!(IntervalCovering::new(vec![iv("0", "1/2"), iv("2/3", "1")]).is_err());
        assert!(IntervalCovering::new(vec![iv("0", "1/2"), iv("1/2", "1/2"), iv("1/2", "1")]).is_err());
        assert!(IntervalCovering::new(vec![iv("0", "3/4")]).is_err());
        assert!(IntervalCovering::new(vec![]).is_err());
        let overlapping = IntervalCovering::new(vec![iv("0", "2/3"), iv("1/3", "1")]).unwrap();
        assert!(overlapping.check_essential_partition().is_err());
        assert!(IntervalCovering::partition(vec![iv("1/2", "1"), iv("0", "1/2")]).is_ok());
    }

    #[test]
    fn single_monotone_map_bound_one() {
        let sys = FunctionSystem::uniform(vec![pwl(&[("0", "1/4"), ("1", "3/4")])]).unwrap();
        let cover = IntervalCovering::new(vec![Interval::unit()]).unwrap();
        let cert = verify_tableaux(&sys, &cover).unwrap();
        assert_eq!(cert.variation_bound, r("1"));
        assert_eq!(cert.phi, vec![vec![0]]);
        assert!(cert.recheck(&sys).is_ok());
    }

    #[test]
    fn tent_is_rejected() {
        let sys = FunctionSystem::uniform(vec![tent()]).unwrap();
        let whole = IntervalCovering::new(vec![Interval::unit()]).unwrap();
        let v = verify_tableaux(&sys, &whole).unwrap_err();
        assert_eq!(
            v.reason,
            ViolationReason::NonMonotone {
                turning_point: r("1/2")
            }
        );
        let v = verify_tableaux(&sys, &halves()).unwrap_err();
        assert_eq!(v.interval, 0);
        assert_eq!(v.reason, ViolationReason::ImageNotContained { image: Box::new(Interval::unit()) });
    }

    #[test]
    fn phi_prefers_lowest_index() {
        let sys = FunctionSystem::uniform(vec![pwl(&[("0", "0"), ("1", "1/8")])]).unwrap();
        let cover = IntervalCovering::new(vec![iv("0", "1/2"), iv("0", "1/4"), iv("1/4", "1")]).unwrap();
        let cert = verify_tableaux(&sys, &cover).unwrap();
        assert_eq!(cert.phi, vec![vec![0, 0, 0]]);
        assert_eq!(cert.variation_bound, r("9"));
    }

    #[test]
    fn recheck_catches_tampering() {
        let sys = FunctionSystem::uniform(vec![PwlFunction::identity()]).unwrap();
        let mut cert = verify_tableaux(&sys, &halves()).unwrap();
        assert_eq!(cert.phi, vec![vec![0, 1]]);
        cert.phi[0][0] = 1;
        assert!(cert.recheck(&sys).is_err());
    }

    #[test]
    fn corner_crossings() {
        let id = FunctionSystem::uniform(vec![PwlFunction::identity()]).unwrap();
        assert!(check_corner_crossing(&id, &halves()).unwrap().holds);
        let shift = FunctionSystem::uniform(vec![pwl(&[("0", "1/4"), ("3/4", "1"), ("1", "1")])]).unwrap();
        let rep = check_corner_crossing(&shift, &halves()).unwrap();
        assert!(!rep.holds);
        let w = rep.witness.unwrap();
        assert_eq!(w.x, r("1/4"));
        assert_eq!(w.kind, CrossingKind::InteriorCrossing { boundary: r("1/2") });
        let tent = FunctionSystem::uniform(vec![tent()]).unwrap();
        let whole = IntervalCovering::new(vec![Interval::unit()]).unwrap();
        let rep = check_corner_crossing(&tent, &whole).unwrap();
        assert_eq!(rep.witness.unwrap().kind, CrossingKind::NonMonotone);
        let overlapping = IntervalCovering::new(vec![iv("0", "2/3"), iv("1/3", "1")]).unwrap();
        assert!(check_corner_crossing(&id, &overlapping).is_err());
    }

    #[test]
    fn mu_injectivity() {
        let halves = FunctionSystem::uniform(vec![pwl(&[("0", "0"), ("1", "1/2")]), pwl(&[("0", "1/2"), ("1", "1")])])
            .unwrap();
        let rep = check_mu_injective(&halves).unwrap();
        assert!(rep.injective);
        assert_eq!(rep.generic_max_integral, r("1/2"));
        // Both maps reach 1/2, at x = 1 and x = 0 respectively.
        assert_eq!(rep.max_integral, r("1"));
        assert_eq!(rep.max_level, r("1/2"));

        let rep = check_mu_injective(&FunctionSystem::uniform(vec![tent()]).unwrap()).unwrap();
        assert!(!rep.injective);
        assert_eq!(rep.generic_max_integral, r("2"));

        let inc = FunctionSystem::uniform(vec![pwl(&[("0", "0"), ("1/3", "1/2"), ("1", "1")])]).unwrap();
        let rep = check_mu_injective(&inc).unwrap();
        assert!(rep.injective);
        assert_eq!(rep.max_integral, r("1"));

        let flat = FunctionSystem::uniform(vec![pwl(&[("0", "0"), ("1/3", "1/2"), ("2/3", "1/2"), ("1", "1")])]).unwrap();
        assert!(matches!(check_mu_injective(&flat), Err(Error::FlatSegment { .. })));
    }

    #[test]
    fn u_conditions() {
        let half = FunctionSystem::uniform(vec![pwl(&[("0", "0"), ("1", "1/2")])]).unwrap();
        let rep = check_u_conditions(&half);
        assert!(rep.u1 && !rep.u2);
        assert_eq!(rep.u2_witness, Some(r("1/2")));

        let id = FunctionSystem::uniform(vec![PwlFunction::identity()]).unwrap();
        let rep = check_u_conditions(&id);
        assert!(!rep.u1 && !rep.u2);
        assert_eq!(rep.u1_witness, Some(r("1/2")));
        assert_eq!(rep.u2_witness, Some(r("1/2")));

        // Each map alone satisfies one condition; together they satisfy both.
        let pair: Vec<PwlFunction> = vec![pwl(&[("0", "0"), ("1", "1/2")]), pwl(&[("0", "1/2"), ("1", "1")])];
        let rep = check_u_conditions(&FunctionSystem::uniform(pair).unwrap());
        assert!(rep.u1 && rep.u2);
    }
}
