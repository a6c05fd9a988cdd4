//! Reference systems: a monotone pair, a three-map tableaux system and the
//! compensation pair `(f1, f2)`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::certificates::IntervalCovering;
use crate::error::{invalid, Error, Result};
use crate::pwl::{nonnegative_witness, Interval, PwlFunction, DEFAULT_BREAKPOINT_BUDGET};
use crate::rational::Rational;
use crate::sampling::stream_rng;
use crate::system::{FunctionSystem, Word};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn points(pts: &[(Rational, Rational)]) -> PwlFunction {
    PwlFunction::from_points(pts.iter().cloned()).expect("valid fixture")
}

/// `{x/2 + 1/8, x/2 + 3/8}` with equal weights.
pub fn build_monotone_demo() -> FunctionSystem {
    let g0 = points(&[(q(0, 1), q(1, 8)), (q(1, 1), q(5, 8))]);
    let g1 = points(&[(q(0, 1), q(3, 8)), (q(1, 1), q(7, 8))]);
    FunctionSystem::new(vec![g0, g1], vec![q(1, 2), q(1, 2)], vec!["g0".into(), "g1".into()])
        .expect("valid fixture")
}

/// Three maps compatible with the quarter partition of `[0, 1]`: `g1` below
/// the diagonal, `g2` above it, `g3` crossing it at the corner `(1/2, 1/2)`.
pub fn build_tableaux_example() -> (FunctionSystem, IntervalCovering) {
    let g1 = points(&[
        (q(0, 1), q(0, 1)),
        (q(1, 4), q(3, 16)),
        (q(1, 2), q(1, 4)),
        (q(3, 4), q(1, 8)),
        (q(1, 1), q(0, 1)),
    ]);
    let g2 = points(&[
        (q(0, 1), q(3, 4)),
        (q(1, 4), q(1, 2)),
        (q(1, 2), q(3, 4)),
        (q(3, 4), q(7, 8)),
        (q(1, 1), q(1, 1)),
    ]);
    let g3 = points(&[
        (q(0, 1), q(1, 1)),
        (q(1, 4), q(3, 4)),
        (q(1, 2), q(1, 2)),
        (q(3, 4), q(1, 4)),
        (q(1, 1), q(3, 8)),
    ]);
    let third = q(1, 3);
    let system = FunctionSystem::new(
        vec![g1, g2, g3],
        vec![third.clone(), third.clone(), third],
        vec!["g1".into(), "g2".into(), "g3".into()],
    )
    .expect("valid fixture");
    (system, quarter_partition())
}

pub fn quarter_partition() -> IntervalCovering {
    let cuts = [q(0, 1), q(1, 4), q(1, 2), q(3, 4), q(1, 1)];
    let intervals = cuts
        .windows(2)
        .map(|w| Interval::new(w[0].clone(), w[1].clone()).expect("ordered cuts"))
        .collect();
    IntervalCovering::partition(intervals).expect("quarters partition [0, 1]")
}

/// Parameters of the compensation pair. Level `n` uses `aₙ = rⁿ`,
/// `bₙ = w·rⁿ`, `Iₙ = [aₙ, bₙ]`, `Jₙ = [bₙ, aₙ₋₁]` and `mₙ = m_baseⁿ`
/// oscillations; levels below `depth` are closed off linearly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompensationParams {
    pub ratio: Rational,
    pub width: Rational,
    pub m_base: u64,
    pub depth: usize,
    pub slope_j: Rational,
}

impl Default for CompensationParams {
    fn default() -> Self {
        CompensationParams {
            ratio: q(1, 4),
            width: q(2, 1),
            m_base: 5,
            depth: 4,
            slope_j: q(1, 2),
        }
    }
}

impl CompensationParams {
    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let one = Rational::one();
        if !self.ratio.is_positive() || self.ratio >= one {
            return Err(invalid(format!("ratio {} must lie in (0, 1)", self.ratio)));
        }
        if self.width <= one || &self.width * &self.ratio >= one {
            return Err(invalid(format!(
                "width {} must lie in (1, 1/ratio) = (1, {})",
                self.width,
                self.ratio.recip()
            )));
        }
        if self.m_base < 2 {
            return Err(invalid(format!("m_base {} must be at least 2", self.m_base)));
        }
        if self.depth == 0 {
            return Err(invalid("depth must be at least 1"));
        }
        if !self.slope_j.is_positive() || self.slope_j >= one {
            return Err(invalid(format!("slope on J levels {} must lie in (0, 1)", self.slope_j)));
        }
        let mut total: u64 = 4;
        let mut m: u64 = 1;
        for _ in 0..self.depth {
            m = m
                .checked_mul(self.m_base)
                .filter(|m| *m <= DEFAULT_BREAKPOINT_BUDGET as u64)
                .ok_or(Error::Resource {
                    budget: DEFAULT_BREAKPOINT_BUDGET,
                })?;
            total += 2 * m;
        }
        if total > DEFAULT_BREAKPOINT_BUDGET as u64 {
            return Err(Error::Resource {
                budget: DEFAULT_BREAKPOINT_BUDGET,
            });
        }
        // (2mₙ₊₁ − 1)|Iₙ₊₂| > (2mₙ − 1)|Iₙ₊₁| reduces to (2mₙ₊₁ − 1)·r > 2mₙ − 1.
        let mut m_n = self.m_base;
        for n in 1..self.depth {
            let next = m_n * self.m_base;
            if Rational::from_integer(2 * next as i64 - 1) * &self.ratio <= Rational::from_integer(2 * m_n as i64 - 1) {
                return Err(invalid(format!(
                    "level variation (2m_n - 1)|I_(n+1)| must increase, but fails between levels {n} and {}",
                    n + 1
                )));
            }
            m_n = next;
        }
        Ok(())
    }
}

/// Exact data for level `n` of the construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelData {
    pub n: usize,
    pub a: Rational,
    pub b: Rational,
    pub m: u64,
    /// `|Iₙ| / (2mₙ − 1)`.
    pub delta: Rational,
    /// Slope of `f2` on `Iₙ`.
    pub slope_i: Rational,
}

impl LevelData {
    pub fn interval_i(&self) -> Interval {
        Interval::new(self.a.clone(), self.b.clone()).expect("aₙ < bₙ in [0, 1]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompensationPair {
    pub f1: PwlFunction,
    pub f2: PwlFunction,
    pub params: CompensationParams,
    pub levels: Vec<LevelData>,
}

pub fn build_compensation(params: &CompensationParams) -> Result<CompensationPair> {
    params.validate()?;
    let r = &params.ratio;
    let mut levels: Vec<LevelData> = Vec::with_capacity(params.depth);
    let mut a = Rational::one();
    let mut m: u64 = 1;
    // Sᴵ₁ = 1/2 and Sᴵₙ = Π_{k<n} (2mₖ − 1)⁻¹ for n ≥ 2.
    let mut prod = Rational::one();
    for n in 1..=params.depth {
        if n > 1 {
            prod = &prod / Rational::from_integer(2 * m as i64 - 1);
        }
        a = &a * r;
        m *= params.m_base;
        let b = &params.width * &a;
        let delta = (&b - &a) / Rational::from_integer(2 * m as i64 - 1);
        levels.push(LevelData {
            n,
            a: a.clone(),
            b,
            m,
            delta,
            slope_i: if n == 1 { q(1, 2) } else { prod.clone() },
        });
    }
    let f1 = build_f1(params, &levels)?;
    let f2 = build_f2(params, &levels)?;
    Ok(CompensationPair {
        f1,
        f2,
        params: params.clone(),
        levels,
    })
}

fn level_a(params: &CompensationParams, n: usize) -> Rational {
    params.ratio.pow(n as u32)
}

fn build_f1(params: &CompensationParams, levels: &[LevelData]) -> Result<PwlFunction> {
    let a_next = |n: usize| level_a(params, n + 1);
    let b_next = |n: usize| &params.width * level_a(params, n + 1);
    let mut pts = vec![(Rational::zero(), Rational::zero())];
    for lvl in levels.iter().rev() {
        let (lo, hi) = (a_next(lvl.n), b_next(lvl.n));
        for k in 0..2 * lvl.m {
            let x = &lvl.a + &lvl.delta * Rational::from_integer(k as i64);
            let y = if k % 2 == 0 { lo.clone() } else { hi.clone() };
            pts.push((x, y));
        }
    }
    pts.push((Rational::one(), level_a(params, 1)));
    PwlFunction::from_points(pts)
}

fn build_f2(params: &CompensationParams, levels: &[LevelData]) -> Result<PwlFunction> {
    let mut pts = vec![(Rational::one(), Rational::one())];
    let mut y = Rational::one();
    let mut top = Rational::one();
    for lvl in levels {
        y = &y - &params.slope_j * (&top - &lvl.b);
        pts.push((lvl.b.clone(), y.clone()));
        y = &y - &lvl.slope_i * (&lvl.b - &lvl.a);
        pts.push((lvl.a.clone(), y.clone()));
        top = lvl.a.clone();
    }
    if y.is_negative() {
        return Err(invalid(format!("f2 would reach {y} below 0")));
    }
    pts.push((Rational::zero(), y));
    pts.reverse();
    PwlFunction::from_points(pts)
}

impl CompensationPair {
    /// `{f1, f2}` with weights `(p, 1 − p)`.
    pub fn system(&self, p: &Rational) -> Result<FunctionSystem> {
        FunctionSystem::new(
            vec![self.f1.clone(), self.f2.clone()],
            vec![p.clone(), Rational::one() - p],
            vec!["f1".into(), "f2".into()],
        )
    }

    /// The same pair with `f2`'s slope on `I_level` multiplied by `factor`.
    pub fn with_scaled_slope(&self, level: usize, factor: &Rational) -> Result<CompensationPair> {
        let mut levels = self.levels.clone();
        let lvl = levels
            .iter_mut()
            .find(|l| l.n == level)
            .ok_or_else(|| invalid(format!("no level {level} at depth {}", self.params.depth)))?;
        lvl.slope_i = &lvl.slope_i * factor;
        let f2 = build_f2(&self.params, &levels)?;
        Ok(CompensationPair {
            f1: self.f1.clone(),
            f2,
            params: self.params.clone(),
            levels,
        })
    }

    /// Scales `Sᴵ₃` by `(2m₂ − 1)²`; `None` below depth 3.
    pub fn negative_control(&self) -> Option<Result<CompensationPair>> {
        let m2 = self.levels.get(1)?.m;
        self.levels.get(2)?;
        let f = Rational::from_integer(2 * m2 as i64 - 1);
        Some(self.with_scaled_slope(3, &(&f * &f)))
    }

    /// `(2mₙ − 1)|Iₙ₊₁|`, the variation of `f1` on `Iₙ`.
    pub fn level_variation_formula(&self, n: usize) -> Option<Rational> {
        let lvl = self.levels.iter().find(|l| l.n == n)?;
        let next_len = (&self.params.width - Rational::one()) * level_a(&self.params, n + 1);
        Some(Rational::from_integer(2 * lvl.m as i64 - 1) * next_len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LipschitzCheck {
    /// `|f2∘f1^m|_L` for `m = 1, 2, …` up to the first failure or `max_m`.
    pub constants: Vec<Rational>,
    pub first_failure: Option<usize>,
}

impl LipschitzCheck {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordCheck {
    pub words: usize,
    pub word_length: usize,
    pub max_variation: Option<Rational>,
    pub budget_exceeded: usize,
    /// First word (with `f2` in front) whose variation exceeded 1.
    pub violation: Option<(Word, Rational)>,
}

impl WordCheck {
    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.budget_exceeded == 0
    }
}

/// Outcome of [`verify_compensation`], one entry per property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompensationReport {
    /// A point of `(0, 1]` with `f1(x) ≥ x`, if any.
    pub f1_below_diagonal: Option<Rational>,
    /// A point of `[0, 1)` with `f2(x) ≤ x`, if any.
    pub f2_above_diagonal: Option<Rational>,
    pub lipschitz: LipschitzCheck,
    pub words: WordCheck,
    /// Exact variation of `f1` on `I₁, …, I_N`.
    pub level_variations: Vec<Rational>,
    pub level_variations_increasing: bool,
    /// Lipschitz check rerun on the pair with `Sᴵ₃` scaled up; `None` below
    /// depth 3. It is expected to fail.
    pub negative_control: Option<LipschitzCheck>,
}

impl CompensationReport {
    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(x) = &self.f1_below_diagonal {
            out.push(format!("f1(x) < x fails at x = {x}"));
        }
        if let Some(x) = &self.f2_above_diagonal {
            out.push(format!("f2(x) > x fails at x = {x}"));
        }
        if let Some(m) = self.lipschitz.first_failure {
            out.push(format!(
                "|f2 f1^{m}|_L = {} exceeds 1",
                self.lipschitz.constants[m - 1]
            ));
        }
        if let Some((w, v)) = &self.words.violation {
            out.push(format!("word {:?} reaches variation {v}", w.indices()));
        }
        if self.words.budget_exceeded > 0 {
            out.push(format!("{} words exceeded the breakpoint budget", self.words.budget_exceeded));
        }
        if !self.level_variations_increasing {
            out.push("variation of f1 on I_n is not strictly increasing".to_string());
        }
        if let Some(c) = &self.negative_control {
            if c.passed() {
                out.push("negative control unexpectedly kept |f2 f1^m|_L <= 1".to_string());
            }
        }
        out
    }
}

fn lipschitz_check(f1: &PwlFunction, f2: &PwlFunction, max_m: usize) -> Result<LipschitzCheck> {
    let mut h = f2.clone();
    let mut constants = Vec::with_capacity(max_m);
    for m in 1..=max_m {
        h = h.compose(f1)?;
        let l = h.lipschitz_constant();
        let bad = l > Rational::one();
        constants.push(l);
        if bad {
            return Ok(LipschitzCheck {
                constants,
                first_failure: Some(m),
            });
        }
    }
    Ok(LipschitzCheck {
        constants,
        first_failure: None,
    })
}

/// Random word number `index` of the corollary check: `f2` followed by
/// `length − 1` letters drawn from `system`.
pub fn f2_prefixed_word(system: &FunctionSystem, length: usize, seed: u64, index: u64) -> Word {
    let f2 = system.index_of("f2").expect("compensation system");
    let tail = system.sample_word_from(length.saturating_sub(1), &mut stream_rng(seed, index));
    let mut indices = Vec::with_capacity(length);
    indices.push(f2);
    indices.extend_from_slice(tail.indices());
    system.word(indices).expect("indices in range")
}

/// Folds per-word variation traces into a [`WordCheck`].
pub fn word_check_from<I>(word_length: usize, traces: I) -> WordCheck
where
    I: IntoIterator<Item = (Word, Result<Rational>)>,
{
    let mut check = WordCheck {
        words: 0,
        word_length,
        max_variation: None,
        budget_exceeded: 0,
        violation: None,
    };
    for (word, sup) in traces {
        check.words += 1;
        match sup {
            Ok(v) => {
                if v > Rational::one() && check.violation.is_none() {
                    check.violation = Some((word, v.clone()));
                }
                if check.max_variation.as_ref().is_none_or(|m| v > *m) {
                    check.max_variation = Some(v);
                }
            }
            Err(_) => check.budget_exceeded += 1,
        }
    }
    check
}

/// Exact checks of the compensation pair's properties: `f1` below and `f2`
/// above the diagonal, `|f2∘f1^m|_L ≤ 1` for `m ≤ max_m`, `V_n ≤ 1` along
/// random `f2`-prefixed words, increasing variation of `f1` across levels,
/// and a perturbed control that must break the Lipschitz bound.
pub fn verify_compensation(
    pair: &CompensationPair,
    max_m: usize,
    word_samples: usize,
    word_length: usize,
    seed: u64,
) -> Result<CompensationReport> {
    let system = pair.system(&q(1, 2))?;
    let words = (0..word_samples as u64).map(|i| {
        let w = f2_prefixed_word(&system, word_length, seed, i);
        let sup = system.variation_trace(&w).map(|t| t.sup);
        (w, sup)
    });
    let words = word_check_from(word_length, words);
    verify_compensation_with_words(pair, max_m, words)
}

/// As [`verify_compensation`], with the word check supplied by the caller.
pub fn verify_compensation_with_words(
    pair: &CompensationPair,
    max_m: usize,
    words: WordCheck,
) -> Result<CompensationReport> {
    if max_m == 0 {
        return Err(Error::Precondition("max_m must be at least 1".into()));
    }
    let f1 = &pair.f1;
    let f2 = &pair.f2;
    let f1_below_diagonal = nonnegative_witness(f1.breakpoints(), &f1.minus_identity(), false, true);
    let f2_above_diagonal = nonnegative_witness(f2.breakpoints(), &f2.identity_minus(), true, false);
    let lipschitz = lipschitz_check(f1, f2, max_m)?;
    let level_variations: Vec<Rational> = pair
        .levels
        .iter()
        .map(|l| f1.total_variation(&l.interval_i()))
        .collect();
    let level_variations_increasing = level_variations.windows(2).all(|w| w[0] < w[1]);
    let negative_control = match pair.negative_control() {
        Some(control) => Some(lipschitz_check(f1, &control?.f2, max_m)?),
        None => None,
    };
    Ok(CompensationReport {
        f1_below_diagonal,
        f2_above_diagonal,
        lipschitz,
        words,
        level_variations,
        level_variations_increasing,
        negative_control,
    })
}
