//! Continuous piecewise-linear self-maps of `[0, 1]` with rational breakpoints.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::rational::Rational;

/// Breakpoint budget applied by [`PwlFunction::compose`].
pub const DEFAULT_BREAKPOINT_BUDGET: usize = 1_000_000;

/// A closed subinterval `[lo, hi]` of `[0, 1]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo.is_negative() || hi > Rational::one() || lo > hi {
            return Err(invalid(alloc::format!("[{lo}, {hi}] is not a subinterval of [0, 1]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn has_interior(&self) -> bool {
        self.lo < self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn midpoint(&self) -> Rational {
        self.lo.midpoint(&self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Number of connected components of a level set `f⁻¹(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preimages {
    Finite(usize),
    /// Some component is a segment of positive length on which `f ≡ y`.
    Infinite { components: usize },
}

impl Preimages {
    pub fn components(&self) -> usize {
        match *self {
            Preimages::Finite(n) | Preimages::Infinite { components: n } => n,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Preimages::Finite(_))
    }
}

/// A continuous piecewise-linear map `[0, 1] → [0, 1]` in canonical form.
///
/// Breakpoints are strictly increasing from `0` to `1`, and no interior
/// breakpoint joins two segments of equal slope, so two functions are equal
/// exactly when their breakpoint and value lists are.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PwlFunction {
    xs: Vec<Rational>,
    ys: Vec<Rational>,
}

/// Streams points left to right, dropping collinear interior points.
///
/// `push` compares the new piece with the previous one; `push_distinct` is
/// for callers that know the two slopes differ and skips the comparison.
struct CanonicalBuilder {
    xs: Vec<Rational>,
    ys: Vec<Rational>,
    /// Slope of the last piece, if computed since it was appended.
    last_slope: Option<Rational>,
    budget: usize,
}

impl CanonicalBuilder {
    fn new(capacity: usize, budget: usize) -> Self {
        CanonicalBuilder {
            xs: Vec::with_capacity(capacity),
            ys: Vec::with_capacity(capacity),
            last_slope: None,
            budget,
        }
    }

    fn last_piece_slope(&self) -> Option<Rational> {
        match self.xs.len() {
            0 | 1 => None,
            n => Some((&self.ys[n - 1] - &self.ys[n - 2]) / (&self.xs[n - 1] - &self.xs[n - 2])),
        }
    }

    fn push(&mut self, x: Rational, y: Rational) -> Result<()> {
        if let (Some(lx), Some(ly)) = (self.xs.last(), self.ys.last()) {
            if *lx == x {
                return Ok(());
            }
            let slope = (&y - ly) / (&x - lx);
            let previous = match self.last_slope.take() {
                Some(s) => Some(s),
                None => self.last_piece_slope(),
            };
            if previous.as_ref() == Some(&slope) {
                self.xs.pop();
                self.ys.pop();
            }
            self.last_slope = Some(slope);
        }
        self.append(x, y)
    }

    fn push_distinct(&mut self, x: Rational, y: Rational) -> Result<()> {
        self.last_slope = None;
        self.append(x, y)
    }

    fn append(&mut self, x: Rational, y: Rational) -> Result<()> {
        self.xs.push(x);
        self.ys.push(y);
        if self.xs.len() > self.budget {
            return Err(Error::Resource { budget: self.budget });
        }
        Ok(())
    }

    fn finish(self) -> PwlFunction {
        PwlFunction {
            xs: self.xs,
            ys: self.ys,
        }
    }
}

fn check_unit(x: &Rational) -> Result<()> {
    if x.is_negative() || *x > Rational::one() {
        Err(Error::Domain(x.clone()))
    } else {
        Ok(())
    }
}

impl PwlFunction {
    /// Builds the linear interpolant through `(breakpoints[i], values[i])`.
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(invalid(alloc::format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.len() < 2 {
            return Err(invalid("a piecewise-linear map needs at least two breakpoints"));
        }
        if !breakpoints[0].is_zero() || breakpoints[breakpoints.len() - 1] != Rational::one() {
            return Err(invalid("breakpoints must start at 0 and end at 1"));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(invalid(alloc::format!(
                "breakpoints must be strictly increasing ({} then {})",
                w[0],
                w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_negative() || **v > Rational::one()) {
            return Err(invalid(alloc::format!("value {v} lies outside [0, 1]")));
        }
        let mut b = CanonicalBuilder::new(breakpoints.len(), usize::MAX);
        for (x, y) in breakpoints.into_iter().zip(values) {
            b.push(x, y)?;
        }
        Ok(b.finish())
    }

    pub fn from_points<I>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let (xs, ys) = points.into_iter().unzip();
        PwlFunction::new(xs, ys)
    }

    pub fn identity() -> Self {
        PwlFunction {
            xs: alloc::vec![Rational::zero(), Rational::one()],
            ys: alloc::vec![Rational::zero(), Rational::one()],
        }
    }

    pub fn constant(c: Rational) -> Result<Self> {
        PwlFunction::new(alloc::vec![Rational::zero(), Rational::one()], alloc::vec![c.clone(), c])
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.xs
    }

    pub fn values(&self) -> &[Rational] {
        &self.ys
    }

    pub fn points(&self) -> impl Iterator<Item = (&Rational, &Rational)> + '_ {
        self.xs.iter().zip(self.ys.iter())
    }

    pub fn num_breakpoints(&self) -> usize {
        self.xs.len()
    }

    pub fn num_segments(&self) -> usize {
        self.xs.len() - 1
    }

    /// Slope of segment `i`, joining breakpoints `i` and `i + 1`.
    pub fn slope(&self, i: usize) -> Rational {
        (&self.ys[i + 1] - &self.ys[i]) / (&self.xs[i + 1] - &self.xs[i])
    }

    pub fn slopes(&self) -> impl Iterator<Item = Rational> + '_ {
        (0..self.num_segments()).map(move |i| self.slope(i))
    }

    pub(crate) fn eval_in_unit(&self, x: &Rational) -> Rational {
        match self.xs.binary_search(x) {
            Ok(i) => self.ys[i].clone(),
            Err(j) => {
                let (x0, x1) = (&self.xs[j - 1], &self.xs[j]);
                let (y0, y1) = (&self.ys[j - 1], &self.ys[j]);
                y0 + (x - x0) * (y1 - y0) / (x1 - x0)
            }
        }
    }

    pub fn evaluate(&self, x: &Rational) -> Result<Rational> {
        check_unit(x)?;
        Ok(self.eval_in_unit(x))
    }

    /// `self ∘ inner` with the default breakpoint budget.
    pub fn compose(&self, inner: &PwlFunction) -> Result<PwlFunction> {
        self.compose_with_budget(inner, DEFAULT_BREAKPOINT_BUDGET)
    }

    /// `self ∘ inner`, failing once the canonical result would need more
    /// than `budget` breakpoints.
    ///
    /// On each segment of `inner` the result changes slope only where `inner`
    /// passes a breakpoint of `self`, so those preimages plus the breakpoints
    /// of `inner` are all the candidates.
    pub fn compose_with_budget(&self, inner: &PwlFunction, budget: usize) -> Result<PwlFunction> {
        let outer = self;
        let mut out = CanonicalBuilder::new(inner.xs.len() + outer.xs.len(), budget);
        let mut prev_value = outer.eval_in_unit(&inner.ys[0]);
        out.push(inner.xs[0].clone(), prev_value.clone())?;
        for i in 0..inner.num_segments() {
            let (x0, x1) = (&inner.xs[i], &inner.xs[i + 1]);
            let (y0, y1) = (&inner.ys[i], &inner.ys[i + 1]);
            // Inside one monotone segment of `inner`, successive pieces follow
            // successive segments of `outer`, whose slopes differ; only the
            // first piece can continue the previous one.
            let mut first = true;
            let (lo, hi) = match y0.cmp(y1) {
                Ordering::Equal => (0, 0),
                Ordering::Less => (outer.xs.partition_point(|b| b <= y0), outer.xs.partition_point(|b| b < y1)),
                Ordering::Greater => (outer.xs.partition_point(|b| b <= y1), outer.xs.partition_point(|b| b < y0)),
            };
            if lo < hi {
                let inv = (x1 - x0) / (y1 - y0);
                let mut emit = |k: usize| {
                    let x = x0 + (&outer.xs[k] - y0) * &inv;
                    let y = outer.ys[k].clone();
                    if core::mem::take(&mut first) {
                        out.push(x, y)
                    } else {
                        out.push_distinct(x, y)
                    }
                };
                if y0 < y1 {
                    (lo..hi).try_for_each(&mut emit)?;
                } else {
                    (lo..hi).rev().try_for_each(&mut emit)?;
                }
            }
            if y0 != y1 {
                prev_value = outer.eval_in_unit(y1);
            }
            if first {
                out.push(x1.clone(), prev_value.clone())?;
            } else {
                out.push_distinct(x1.clone(), prev_value.clone())?;
            }
        }
        Ok(out.finish())
    }

    /// Values of `self` at `lo`, at every breakpoint strictly inside, and at `hi`.
    fn clipped_values<'a>(&'a self, on: &'a Interval) -> impl Iterator<Item = Rational> + 'a {
        let start = self.xs.partition_point(|b| b <= &on.lo);
        let end = self.xs.partition_point(|b| b < &on.hi);
        let inner = self.ys[start..end.max(start)].iter().cloned();
        core::iter::once(self.eval_in_unit(&on.lo))
            .chain(inner)
            .chain(core::iter::once(self.eval_in_unit(&on.hi)))
    }

    /// Total variation on `on`: the sum of absolute value changes across
    /// consecutive breakpoints clipped to the interval.
    pub fn total_variation(&self, on: &Interval) -> Rational {
        if !on.has_interior() {
            return Rational::zero();
        }
        let mut total = Rational::zero();
        let mut it = self.clipped_values(on);
        let mut prev = it.next().expect("at least one value");
        for v in it {
            total += (&v - &prev).abs();
            prev = v;
        }
        total
    }

    /// Total variation on `[0, 1]`.
    pub fn variation(&self) -> Rational {
        let mut total = Rational::zero();
        for w in self.ys.windows(2) {
            total += (&w[1] - &w[0]).abs();
        }
        total
    }

    /// Largest absolute slope.
    pub fn lipschitz_constant(&self) -> Rational {
        self.slopes()
            .map(|s| s.abs())
            .max()
            .expect("at least one segment")
    }

    pub fn preimage_count(&self, y: &Rational) -> Result<Preimages> {
        check_unit(y)?;
        let mut components: usize = 0;
        let mut flat = false;
        let mut last_hi: Option<Rational> = None;
        let mut add = |lo: Rational, hi: Rational| {
            if last_hi.as_ref().is_some_and(|h| lo <= *h) {
                if last_hi.as_ref().is_some_and(|h| hi > *h) {
                    last_hi = Some(hi);
                }
            } else {
                components += 1;
                last_hi = Some(hi);
            }
        };
        for i in 0..self.num_segments() {
            let (x0, x1) = (&self.xs[i], &self.xs[i + 1]);
            let (y0, y1) = (&self.ys[i], &self.ys[i + 1]);
            if y0 == y && y1 == y {
                flat = true;
                add(x0.clone(), x1.clone());
            } else if y0 == y {
                add(x0.clone(), x0.clone());
            } else if y1 == y {
                add(x1.clone(), x1.clone());
            } else if (y0 < y) != (y1 < y) {
                let x = x0 + (y - y0) * (x1 - x0) / (y1 - y0);
                add(x.clone(), x);
            }
        }
        Ok(if flat {
            Preimages::Infinite { components }
        } else {
            Preimages::Finite(components)
        })
    }

    /// `None` if `self` is monotone on `on`, otherwise a turning point inside it.
    pub fn monotonicity_violation(&self, on: &Interval) -> Option<Rational> {
        if !on.has_interior() {
            return None;
        }
        let start = self.xs.partition_point(|b| b <= &on.lo);
        let end = self.xs.partition_point(|b| b < &on.hi);
        let mut dir = Ordering::Equal;
        let mut prev = self.eval_in_unit(&on.lo);
        let mut prev_x = on.lo.clone();
        let tail = core::iter::once((on.hi.clone(), self.eval_in_unit(&on.hi)));
        let pts = self.xs[start..end.max(start)]
            .iter()
            .cloned()
            .zip(self.ys[start..end.max(start)].iter().cloned())
            .chain(tail);
        for (x, v) in pts {
            let step = v.cmp(&prev);
            if step != Ordering::Equal {
                if dir == Ordering::Equal {
                    dir = step;
                } else if dir != step {
                    return Some(prev_x);
                }
            }
            prev = v;
            prev_x = x;
        }
        None
    }

    pub fn is_monotone_on(&self, on: &Interval) -> bool {
        self.monotonicity_violation(on).is_none()
    }

    pub fn is_monotone(&self) -> bool {
        self.is_monotone_on(&Interval::unit())
    }

    /// `f(on)`, exactly.
    pub fn image(&self, on: &Interval) -> Interval {
        let mut it = self.clipped_values(on);
        let first = it.next().expect("at least one value");
        let (lo, hi) = it.fold((first.clone(), first), |(lo, hi), v| {
            if v < lo {
                (v, hi)
            } else if v > hi {
                (lo, v)
            } else {
                (lo, hi)
            }
        });
        Interval { lo, hi }
    }

    /// Maximal segments on which the function is constant.
    pub fn flat_segments(&self) -> impl Iterator<Item = Interval> + '_ {
        (0..self.num_segments())
            .filter(move |&i| self.ys[i] == self.ys[i + 1])
            .map(move |i| Interval {
                lo: self.xs[i].clone(),
                hi: self.xs[i + 1].clone(),
            })
    }

    /// Values of `self(x) - x` at every breakpoint; linear in between.
    pub(crate) fn minus_identity(&self) -> Vec<Rational> {
        self.points().map(|(x, y)| y - x).collect()
    }

    /// Values of `x - self(x)` at every breakpoint; linear in between.
    pub(crate) fn identity_minus(&self) -> Vec<Rational> {
        self.points().map(|(x, y)| x - y).collect()
    }
}

impl fmt::Debug for PwlFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.points()).finish()
    }
}

fn envelope(fs: &[PwlFunction], pick: Ordering) -> Result<PwlFunction> {
    if fs.is_empty() {
        return Err(invalid("envelope of an empty family"));
    }
    let mut grid: Vec<Rational> = fs.iter().flat_map(|f| f.xs.iter().cloned()).collect();
    grid.sort();
    grid.dedup();
    let at = |x: &Rational| -> Vec<Rational> { fs.iter().map(|f| f.eval_in_unit(x)).collect() };
    let mut xs = Vec::with_capacity(grid.len());
    let mut left = at(&grid[0]);
    xs.push(grid[0].clone());
    for w in grid.windows(2) {
        let right = at(&w[1]);
        let mut cuts: Vec<Rational> = Vec::new();
        for i in 0..fs.len() {
            for j in i + 1..fs.len() {
                let dl = &left[i] - &left[j];
                let dr = &right[i] - &right[j];
                if dl.is_zero() || dr.is_zero() || dl.is_negative() == dr.is_negative() {
                    continue;
                }
                cuts.push(&w[0] + (&w[1] - &w[0]) * &dl / (&dl - &dr));
            }
        }
        cuts.sort();
        cuts.dedup();
        xs.extend(cuts);
        xs.push(w[1].clone());
        left = right;
    }
    let ys = xs
        .iter()
        .map(|x| {
            let vals = fs.iter().map(|f| f.eval_in_unit(x));
            match pick {
                Ordering::Less => vals.min(),
                _ => vals.max(),
            }
            .expect("nonempty family")
        })
        .collect();
    PwlFunction::new(xs, ys)
}

/// Pointwise minimum `x ↦ min_f f(x)`.
pub fn lower_envelope(fs: &[PwlFunction]) -> Result<PwlFunction> {
    envelope(fs, Ordering::Less)
}

/// Pointwise maximum `x ↦ max_f f(x)`.
pub fn upper_envelope(fs: &[PwlFunction]) -> Result<PwlFunction> {
    envelope(fs, Ordering::Greater)
}

/// Given a piecewise-linear `d` through `(xs[i], ds[i])`, returns a point of
/// the domain (endpoints included per `closed_lo`/`closed_hi`) where
/// `d >= 0`, scanning left to right, or `None` if `d < 0` throughout.
pub(crate) fn nonnegative_witness(
    xs: &[Rational],
    ds: &[Rational],
    closed_lo: bool,
    closed_hi: bool,
) -> Option<Rational> {
    let last = xs.len() - 1;
    for i in 0..=last {
        let included = (i != 0 || closed_lo) && (i != last || closed_hi);
        if included && !ds[i].is_negative() {
            return Some(xs[i].clone());
        }
        if i == last {
            break;
        }
        let (d0, d1) = (&ds[i], &ds[i + 1]);
        if !d0.is_negative() && !d1.is_negative() {
            return Some(xs[i].midpoint(&xs[i + 1]));
        }
        if d0.is_positive() != d1.is_positive() && (d0.is_positive() || d1.is_positive()) {
            // Strict sign change: the root is interior and has d = 0.
            return Some(&xs[i] + (&xs[i + 1] - &xs[i]) * d0 / (d0 - d1));
        }
    }
    None
}
