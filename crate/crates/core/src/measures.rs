//! Finitely supported probability measures on `[0, 1]` and simulation of the
//! stationary law of a [`FunctionSystem`].

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::pwl::{Interval, PwlFunction};
use crate::rational::Rational;
use crate::sampling::stream_rng;
use crate::system::FunctionSystem;

/// Chain states whose denominators outgrow this many bits are rounded to the
/// nearest multiple of `2^-STATE_GRID_BITS`.
pub const STATE_GRID_BITS: u32 = 64;

/// A probability measure with finitely many atoms in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    positions: Vec<Rational>,
    masses: Vec<Rational>,
    /// `cumulative[i] = ν([0, positions[i]])`.
    cumulative: Vec<Rational>,
}

impl DiscreteMeasure {
    /// Atoms must already be sorted by strictly increasing position.
    pub fn new(atoms: Vec<(Rational, Rational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("a probability measure needs at least one atom"));
        }
        if let Some((p, _)) = atoms.iter().find(|(p, _)| p.is_negative() || *p > Rational::one()) {
            return Err(invalid(format!("atom position {p} lies outside [0, 1]")));
        }
        if let Some((_, m)) = atoms.iter().find(|(_, m)| !m.is_positive()) {
            return Err(invalid(format!("atom mass {m} is not positive")));
        }
        if let Some(w) = atoms.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(invalid(format!(
                "atom positions must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            )));
        }
        let (positions, masses): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
        let mut cumulative = Vec::with_capacity(masses.len());
        let mut acc = Rational::zero();
        for m in &masses {
            acc += m;
            cumulative.push(acc.clone());
        }
        if acc != Rational::one() {
            return Err(invalid(format!("atom masses sum to {acc}, not 1")));
        }
        Ok(DiscreteMeasure {
            positions,
            masses,
            cumulative,
        })
    }

    /// Sorts atoms and merges those at equal positions.
    pub fn from_weighted_atoms(mut atoms: Vec<(Rational, Rational)>) -> Result<Self> {
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rational, Rational)> = Vec::with_capacity(atoms.len());
        for (p, m) in atoms {
            match merged.last_mut() {
                Some((q, acc)) if *q == p => *acc += m,
                _ => merged.push((p, m)),
            }
        }
        DiscreteMeasure::new(merged)
    }

    /// Empirical measure giving each sample mass `1/n`.
    pub fn empirical(mut samples: Vec<Rational>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("empirical measure of no samples"));
        }
        let n = samples.len() as i64;
        samples.sort();
        let mut atoms: Vec<(Rational, Rational)> = Vec::new();
        let mut i = 0;
        while i < samples.len() {
            let j = i + samples[i..].partition_point(|s| *s == samples[i]);
            atoms.push((samples[i].clone(), Rational::new((j - i) as i64, n)));
            i = j;
        }
        DiscreteMeasure::new(atoms)
    }

    pub fn dirac(x: Rational) -> Result<Self> {
        DiscreteMeasure::new(alloc::vec![(x, Rational::one())])
    }

    /// Uniform mass on the midpoints of the `2^levels` dyadic cells of `[0, 1]`.
    pub fn dyadic_midpoints(levels: u32) -> Self {
        let cells = 1i64 << levels;
        let atoms = (0..cells)
            .map(|k| (Rational::new(2 * k + 1, 2 * cells), Rational::new(1, cells)))
            .collect();
        DiscreteMeasure::new(atoms).expect("well-formed grid")
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Rational, &Rational)> + '_ {
        self.positions.iter().zip(self.masses.iter())
    }

    pub fn positions(&self) -> &[Rational] {
        &self.positions
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `ν([0, x])`.
    pub fn cdf(&self, x: &Rational) -> Rational {
        match self.positions.partition_point(|p| p <= x) {
            0 => Rational::zero(),
            k => self.cumulative[k - 1].clone(),
        }
    }

    /// `ν([0, x))`.
    pub fn cdf_open(&self, x: &Rational) -> Rational {
        match self.positions.partition_point(|p| p < x) {
            0 => Rational::zero(),
            k => self.cumulative[k - 1].clone(),
        }
    }

    /// `ν({x})`.
    pub fn mass_at(&self, x: &Rational) -> Rational {
        match self.positions.binary_search(x) {
            Ok(i) => self.masses[i].clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// `ν([lo, hi])`.
    pub fn mass_in(&self, lo: &Rational, hi: &Rational) -> Rational {
        if lo > hi {
            return Rational::zero();
        }
        self.cdf(hi) - self.cdf_open(lo)
    }

    pub fn mean(&self) -> Rational {
        self.atoms().map(|(p, m)| p * m).sum()
    }

    /// `∫ f dν`.
    pub fn integrate(&self, f: &PwlFunction) -> Rational {
        self.atoms().map(|(p, m)| f.eval_in_unit(p) * m).sum()
    }

    /// One step of the chain in law: `Σ_g μ(g)·g♯ν`, computed atom by atom.
    pub fn pushforward(&self, system: &FunctionSystem) -> DiscreteMeasure {
        let mut atoms = Vec::with_capacity(self.len() * system.len());
        for (g, w) in system.maps().iter().zip(system.weights()) {
            for (p, m) in self.atoms() {
                atoms.push((g.eval_in_unit(p), w * m));
            }
        }
        DiscreteMeasure::from_weighted_atoms(atoms).expect("pushforward of a probability measure")
    }

    fn support_shared_with(&self, other: &DiscreteMeasure) -> Option<Rational> {
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            match self.positions[i].cmp(&other.positions[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => return Some(self.positions[i].clone()),
            }
        }
        None
    }

    fn last_support_below(&self, x: &Rational) -> Option<&Rational> {
        match self.positions.partition_point(|p| p < x) {
            0 => None,
            k => Some(&self.positions[k - 1]),
        }
    }

    fn first_support_above(&self, x: &Rational) -> Option<&Rational> {
        self.positions.get(self.positions.partition_point(|p| p <= x))
    }

    /// Mass per equal-width bin of `[0, 1]`; the last bin is closed.
    pub fn histogram(&self, bins: usize) -> Vec<HistogramBin> {
        let n = bins.max(1);
        let mut mass = alloc::vec![Rational::zero(); n];
        let scale = Rational::from_integer(n as i64);
        for (p, m) in self.atoms() {
            let k = (p * &scale).floor();
            let k = if k >= scale { n - 1 } else { k.to_f64() as usize };
            mass[k] += m;
        }
        mass.into_iter()
            .enumerate()
            .map(|(k, m)| HistogramBin {
                lo: Rational::new(k as i64, n as i64),
                hi: Rational::new(k as i64 + 1, n as i64),
                mass: m,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramBin {
    pub lo: Rational,
    pub hi: Rational,
    pub mass: Rational,
}

/// Exact `d_W(ν₁, ν₂) = ∫₀¹ |F₁(t) − F₂(t)| dt`.
pub fn wasserstein1(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Rational {
    let (mut i, mut j) = (0, 0);
    let (mut f1, mut f2) = (Rational::zero(), Rational::zero());
    let mut total = Rational::zero();
    let mut prev: Option<Rational> = None;
    while i < m1.len() || j < m2.len() {
        let next = match (m1.positions.get(i), m2.positions.get(j)) {
            (Some(p), Some(q)) => p.min(q).clone(),
            (Some(p), None) => p.clone(),
            (None, Some(q)) => q.clone(),
            (None, None) => unreachable!(),
        };
        if let Some(t) = &prev {
            total += (&f1 - &f2).abs() * (&next - t);
        }
        while i < m1.len() && m1.positions[i] == next {
            f1 += &m1.masses[i];
            i += 1;
        }
        while j < m2.len() && m2.positions[j] == next {
            f2 += &m2.masses[j];
            j += 1;
        }
        prev = Some(next);
    }
    total
}

/// Empirical law of one simulated chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryEstimate {
    pub measure: DiscreteMeasure,
    pub x0: Rational,
    pub burn_in: usize,
    pub samples: usize,
    pub seed: u64,
    pub endpoint_mass_0: f64,
    pub endpoint_mass_1: f64,
}

/// Keeps chain states exact until their denominators outgrow the state grid.
fn settle(x: Rational) -> Rational {
    if x.denom_bits() > u64::from(STATE_GRID_BITS) {
        x.round_to_dyadic(STATE_GRID_BITS)
    } else {
        x
    }
}

fn check_start(x0: &Rational) -> Result<()> {
    if x0.is_negative() || *x0 > Rational::one() {
        Err(Error::Domain(x0.clone()))
    } else {
        Ok(())
    }
}

/// Visits `x₁, x₂, …` of the chain started at `x0`.
fn run_chain(system: &FunctionSystem, x0: &Rational, steps: usize, seed: u64, mut visit: impl FnMut(usize, &Rational)) {
    let mut rng = stream_rng(seed, 0);
    let mut x = x0.clone();
    for n in 1..=steps {
        x = settle(system.step(&x, &mut rng));
        visit(n, &x);
    }
}

/// Runs one chain from `x0`, drops `burn_in` states and collects the next
/// `samples` into an empirical measure.
pub fn estimate_stationary(
    system: &FunctionSystem,
    x0: &Rational,
    burn_in: usize,
    samples: usize,
    seed: u64,
) -> Result<StationaryEstimate> {
    check_start(x0)?;
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is required".into()));
    }
    let mut kept = Vec::with_capacity(samples);
    run_chain(system, x0, burn_in + samples, seed, |n, x| {
        if n > burn_in {
            kept.push(x.clone());
        }
    });
    let measure = DiscreteMeasure::empirical(kept)?;
    let endpoint_mass_0 = measure.mass_at(&Rational::zero()).to_f64();
    let endpoint_mass_1 = measure.mass_at(&Rational::one()).to_f64();
    Ok(StationaryEstimate {
        measure,
        x0: x0.clone(),
        burn_in,
        samples,
        seed,
        endpoint_mass_0,
        endpoint_mass_1,
    })
}

/// `(1/n) Σ_{i ≤ n} 1_{[0, b)}(xᵢ)` along one chain.
pub fn birkhoff_indicator_average(
    system: &FunctionSystem,
    x0: &Rational,
    b: &Rational,
    n: usize,
    seed: u64,
) -> Result<f64> {
    check_start(x0)?;
    if !b.is_positive() || *b > Rational::one() || n == 0 {
        return Err(Error::Precondition(format!("need 0 < b <= 1 and n >= 1, got b = {b}, n = {n}")));
    }
    let mut hits = 0usize;
    run_chain(system, x0, n, seed, |_, x| {
        if x < b {
            hits += 1;
        }
    });
    Ok(hits as f64 / n as f64)
}

/// `d_W(Σ_g μ(g)·g♯ν, ν)`: zero exactly for stationary `ν`.
pub fn stationarity_residual(system: &FunctionSystem, measure: &DiscreteMeasure) -> Rational {
    wasserstein1(&measure.pushforward(system), measure)
}

/// Empirical mass near and at the endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportReport {
    pub epsilon: Rational,
    /// `ν̂([0, ε))`.
    pub mass_near_zero: Rational,
    /// `ν̂((1 − ε, 1])`.
    pub mass_near_one: Rational,
    pub atom_at_zero: Rational,
    pub atom_at_one: Rational,
}

pub fn support_diagnostics(est: &StationaryEstimate, epsilon: &Rational) -> Result<SupportReport> {
    if !epsilon.is_positive() {
        return Err(Error::Precondition(format!("epsilon {epsilon} must be positive")));
    }
    let m = &est.measure;
    let one = Rational::one();
    let mass_near_zero = m.cdf_open(epsilon);
    let mass_near_one = &one - m.cdf(&(&one - epsilon));
    Ok(SupportReport {
        epsilon: epsilon.clone(),
        mass_near_zero,
        mass_near_one,
        atom_at_zero: m.mass_at(&Rational::zero()),
        atom_at_one: m.mass_at(&one),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassDirection {
    /// `ν₁([0, b)) < ν₂([0, a])`.
    FirstBelowSecond,
    /// `ν₂([0, b)) < ν₁([0, a])`.
    SecondBelowFirst,
}

/// An interval `[a, b]` charged by both measures across which one CDF stays
/// strictly below the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MassOrderingResult {
    pub a: Rational,
    pub b: Rational,
    pub direction: MassDirection,
}

impl MassOrderingResult {
    /// Checks the defining inequalities by direct CDF evaluation.
    pub fn holds_for(&self, nu1: &DiscreteMeasure, nu2: &DiscreteMeasure) -> bool {
        mass_ordering_holds(nu1, nu2, &self.a, &self.b, self.direction)
    }
}

/// Whether `(a, b, direction)` satisfies the mass-ordering inequalities.
pub fn mass_ordering_holds(
    nu1: &DiscreteMeasure,
    nu2: &DiscreteMeasure,
    a: &Rational,
    b: &Rational,
    direction: MassDirection,
) -> bool {
    if a >= b || !nu1.mass_in(a, b).is_positive() || !nu2.mass_in(a, b).is_positive() {
        return false;
    }
    match direction {
        MassDirection::FirstBelowSecond => nu1.cdf_open(b) < nu2.cdf(a),
        MassDirection::SecondBelowFirst => nu2.cdf_open(b) < nu1.cdf(a),
    }
}

/// Finds `a < b` with `ν₁([a, b]), ν₂([a, b]) > 0` and one measure's mass on
/// `[0, b)` strictly below the other's on `[0, a]`, for measures with
/// disjoint supports.
///
/// Starts from a grid point `c` where the CDFs differ, names the measure with
/// less mass on `[0, c]` "low" and the other "high", then:
/// * if `high` has no atom at `c`, take `c̄` = the last atom of `high` below
///   `c`; use `[c̄, c]` when `low` charges it, otherwise stretch to the first
///   atom of `low` above `c`;
/// * otherwise `low` has no atom at `c`, and `[c, first atom of low above c]`
///   works.
pub fn mass_ordering(nu1: &DiscreteMeasure, nu2: &DiscreteMeasure) -> Result<MassOrderingResult> {
    if let Some(x) = nu1.support_shared_with(nu2) {
        return Err(Error::Precondition(format!("both measures have an atom at {x}")));
    }
    let c = nu1
        .positions
        .iter()
        .chain(nu2.positions.iter())
        .filter(|c| nu1.cdf(c) != nu2.cdf(c))
        .min()
        .expect("measures with disjoint supports differ")
        .clone();
    let swapped = nu1.cdf(&c) > nu2.cdf(&c);
    let (low, high) = if swapped { (nu2, nu1) } else { (nu1, nu2) };
    let first_low_above = |x: &Rational| {
        low.first_support_above(x)
            .expect("low has mass above c since low([0, c]) < 1")
            .clone()
    };
    let (a, b) = if high.mass_at(&c).is_zero() {
        let c_bar = high
            .last_support_below(&c)
            .expect("high([0, c)) > 0")
            .clone();
        if low.mass_in(&c_bar, &c).is_positive() {
            (c_bar, c)
        } else {
            let c_tilde = first_low_above(&c);
            (c_bar, c_tilde)
        }
    } else {
        let c_tilde = first_low_above(&c);
        (c, c_tilde)
    };
    let direction = if swapped {
        MassDirection::SecondBelowFirst
    } else {
        MassDirection::FirstBelowSecond
    };
    let result = MassOrderingResult { a, b, direction };
    debug_assert!(result.holds_for(nu1, nu2));
    Ok(result)
}

/// Convenience: `[lo, hi]` mass as an [`Interval`] query.
pub fn mass_on(m: &DiscreteMeasure, on: &Interval) -> Rational {
    m.mass_in(on.lo(), on.hi())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn delta(s: &str) -> DiscreteMeasure {
        DiscreteMeasure::dirac(r(s)).unwrap()
    }

    fn pwl(pts: &[(&str, &str)]) -> PwlFunction {
        PwlFunction::from_points(pts.iter().map(|(x, y)| (r(x), r(y)))).unwrap()
    }

    fn halves_system() -> FunctionSystem {
        FunctionSystem::uniform(vec![pwl(&[("0", "0"), ("1", "1/2")]), pwl(&[("0", "1/2"), ("1", "1")])]).unwrap()
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![(r("1/2"), r("1/2"))]).is_err());
        assert!(DiscreteMeasure::new(vec![(r("3/2"), r("1"))]).is_err());
        assert!(DiscreteMeasure::new(vec![(r("1/2"), r("1/2")), (r("1/4"), r("1/2"))]).is_err());
        assert!(DiscreteMeasure::new(vec![(r("1/2"), r("0")), (r("3/4"), r("1"))]).is_err());
        let m = DiscreteMeasure::from_weighted_atoms(vec![(r("1/2"), r("1/4")), (r("1/4"), r("1/2")), (r("1/2"), r("1/4"))])
            .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.mass_at(&r("1/2")), r("1/2"));
    }

    #[test]
    fn cdfs() {
        let m = DiscreteMeasure::empirical(vec![r("0"), r("1/2"), r("1/2"), r("1")]).unwrap();
        assert_eq!(m.cdf(&r("1/2")), r("3/4"));
        assert_eq!(m.cdf_open(&r("1/2")), r("1/4"));
        assert_eq!(m.mass_in(&r("1/4"), &r("1")), r("3/4"));
        assert_eq!(m.mean(), r("1/2"));
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein1(&delta("0"), &delta("1")), r("1"));
        assert_eq!(wasserstein1(&delta("1/3"), &delta("3/4")), r("5/12"));
        let split = DiscreteMeasure::new(vec![(r("0"), r("1/2")), (r("1"), r("1/2"))]).unwrap();
        assert_eq!(wasserstein1(&split, &delta("1/2")), r("1/2"));
        assert_eq!(wasserstein1(&split, &split), r("0"));
    }

    #[test]
    fn dyadic_grid_distances() {
        let g = DiscreteMeasure::dyadic_midpoints(3);
        assert_eq!(g.len(), 8);
        assert_eq!(g.mean(), r("1/2"));
        // Eight sub-atoms per cell sit at odd multiples of 1/128 from its midpoint.
        let finer = DiscreteMeasure::dyadic_midpoints(6);
        assert_eq!(wasserstein1(&g, &finer), r("1/32"));
    }

    #[test]
    fn halving_concentrates_at_zero() {
        let sys = FunctionSystem::uniform(vec![pwl(&[("0", "0"), ("1", "1/2")])]).unwrap();
        let est = estimate_stationary(&sys, &r("1"), 20, 50, 3).unwrap();
        assert!(est.measure.mean() < Rational::dyadic_unit(20));
        let rep = support_diagnostics(&est, &r("1/1000")).unwrap();
        assert_eq!(rep.mass_near_zero, r("1"));
        let avg = birkhoff_indicator_average(&sys, &r("1"), &r("1/2"), 1000, 0).unwrap();
        assert!(avg > 0.99);
    }

    #[test]
    fn fixed_point_start_stays_put() {
        let sys = FunctionSystem::uniform(vec![pwl(&[("0", "1/3"), ("1", "2/3")])]).unwrap();
        let est = estimate_stationary(&sys, &r("1/2"), 5, 100, 9).unwrap();
        assert_eq!(est.measure, delta("1/2"));
        assert_eq!(stationarity_residual(&sys, &est.measure), r("0"));
    }

    #[test]
    fn full_interval_indicator_is_one() {
        let avg = birkhoff_indicator_average(&halves_system(), &r("1/3"), &r("1"), 500, 1).unwrap();
        assert_eq!(avg, 1.0);
        assert!(birkhoff_indicator_average(&halves_system(), &r("1/3"), &r("0"), 10, 1).is_err());
    }

    #[test]
    fn estimates_are_deterministic() {
        let a = estimate_stationary(&halves_system(), &r("1/10"), 10, 500, 42).unwrap();
        let b = estimate_stationary(&halves_system(), &r("1/10"), 10, 500, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.measure.len(), 500);
    }

    #[test]
    fn states_are_kept_on_a_bounded_grid() {
        let est = estimate_stationary(&halves_system(), &r("1/10"), 200, 100, 0).unwrap();
        assert!(est.measure.positions().iter().all(|p| p.denom_bits() <= 65));
    }

    #[test]
    fn support_report_for_whole_interval() {
        let est = estimate_stationary(&halves_system(), &r("1/3"), 10, 200, 5).unwrap();
        let rep = support_diagnostics(&est, &r("1")).unwrap();
        assert_eq!(&rep.mass_near_zero + &rep.atom_at_one, r("1"));
        assert_eq!(&rep.mass_near_one + &rep.atom_at_zero, r("1"));
    }

    #[test]
    fn mass_ordering_examples() {
        let res = mass_ordering(&delta("1/4"), &delta("3/4")).unwrap();
        assert_eq!((res.a.clone(), res.b.clone()), (r("1/4"), r("3/4")));
        assert_eq!(res.direction, MassDirection::SecondBelowFirst);

        let res = mass_ordering(&delta("0"), &delta("1")).unwrap();
        assert_eq!((res.a.clone(), res.b.clone()), (r("0"), r("1")));
        assert_eq!(res.direction, MassDirection::SecondBelowFirst);

        let two = DiscreteMeasure::new(vec![(r("1/5"), r("1/2")), (r("4/5"), r("1/2"))]).unwrap();
        let res = mass_ordering(&two, &delta("1/2")).unwrap();
        assert_eq!((res.a.clone(), res.b.clone()), (r("1/5"), r("1/2")));
        assert_eq!(res.direction, MassDirection::SecondBelowFirst);
        assert!(res.holds_for(&two, &delta("1/2")));

        assert!(mass_ordering(&two, &delta("4/5")).is_err());
    }

    #[test]
    fn histogram_bins() {
        let m = DiscreteMeasure::empirical(vec![r("0"), r("1/4"), r("1/2"), r("1")]).unwrap();
        let h = m.histogram(2);
        assert_eq!(h.len(), 2);
        assert_eq!(h[0].mass, r("1/2"));
        assert_eq!(h[1].mass, r("1/2"));
        assert_eq!(h[1].hi, r("1"));
    }
}
