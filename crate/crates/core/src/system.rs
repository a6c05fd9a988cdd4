//! Finite stochastic dynamical systems `(Γ, μ)` and the variation process of
//! random inner compositions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::pwl::{PwlFunction, DEFAULT_BREAKPOINT_BUDGET};
use crate::rational::Rational;
use crate::sampling::{stream_rng, StreamRng, WeightSampler};

/// Finitely many maps with strictly positive rational weights summing to one.
#[derive(Debug, Clone)]
pub struct FunctionSystem {
    maps: Vec<PwlFunction>,
    weights: Vec<Rational>,
    labels: Vec<String>,
    sampler: WeightSampler,
    budget: usize,
}

impl PartialEq for FunctionSystem {
    fn eq(&self, other: &Self) -> bool {
        self.maps == other.maps && self.weights == other.weights && self.labels == other.labels
    }
}

/// A finite word `(g₁, …, gₙ)` of map indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }
}

/// `V_n = TV(g₁ ∘ … ∘ gₙ, [0, 1])` for every prefix of a word.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationTrace {
    pub word: Word,
    pub variations: Vec<Rational>,
    pub sup: Rational,
}

/// Result of one sampled word in a (BV) estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleOutcome {
    Completed { sup: Rational },
    BudgetExceeded,
}

/// Monte Carlo estimate of `P(sup_{n ≤ N} V_n < K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BvReport {
    pub threshold: Rational,
    pub horizon: usize,
    pub sample_count: usize,
    pub below_count: usize,
    pub fraction_below: f64,
    /// Largest `sup_n V_n` over words that finished within the budget.
    pub max_observed_sup: Option<Rational>,
    /// Words abandoned at the composition budget; counted as not below.
    pub budget_exceeded: usize,
    pub seed: u64,
}

impl BvReport {
    /// Folds per-word outcomes; the result does not depend on their order.
    pub fn from_outcomes<I>(threshold: Rational, horizon: usize, seed: u64, outcomes: I) -> Self
    where
        I: IntoIterator<Item = SampleOutcome>,
    {
        let mut sample_count = 0;
        let mut below_count = 0;
        let mut budget_exceeded = 0;
        let mut max_observed_sup: Option<Rational> = None;
        for o in outcomes {
            sample_count += 1;
            match o {
                SampleOutcome::Completed { sup } => {
                    if sup < threshold {
                        below_count += 1;
                    }
                    if max_observed_sup.as_ref().is_none_or(|m| sup > *m) {
                        max_observed_sup = Some(sup);
                    }
                }
                SampleOutcome::BudgetExceeded => budget_exceeded += 1,
            }
        }
        let fraction_below = if sample_count == 0 {
            0.0
        } else {
            below_count as f64 / sample_count as f64
        };
        BvReport {
            threshold,
            horizon,
            sample_count,
            below_count,
            fraction_below,
            max_observed_sup,
            budget_exceeded,
            seed,
        }
    }
}

impl FunctionSystem {
    pub fn new(maps: Vec<PwlFunction>, weights: Vec<Rational>, labels: Vec<String>) -> Result<Self> {
        if maps.is_empty() {
            return Err(invalid("a system needs at least one map"));
        }
        if weights.len() != maps.len() || labels.len() != maps.len() {
            return Err(invalid(format!(
                "{} maps, {} weights and {} labels",
                maps.len(),
                weights.len(),
                labels.len()
            )));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_positive()) {
            return Err(invalid(format!("weight {w} of map `{}` is not positive", labels[i])));
        }
        let total: Rational = weights.iter().sum();
        if total != Rational::one() {
            return Err(invalid(format!("weights sum to {total}, not 1")));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(invalid(format!("duplicate label `{l}`")));
            }
        }
        let sampler = WeightSampler::new(&weights);
        Ok(FunctionSystem {
            maps,
            weights,
            labels,
            sampler,
            budget: DEFAULT_BREAKPOINT_BUDGET,
        })
    }

    /// Equal weights and labels `g0, g1, …`.
    pub fn uniform(maps: Vec<PwlFunction>) -> Result<Self> {
        let n = maps.len() as i64;
        let labels = (0..maps.len()).map(|i| format!("g{i}")).collect();
        let weights = (0..maps.len()).map(|_| Rational::new(1, n.max(1))).collect();
        FunctionSystem::new(maps, weights, labels)
    }

    /// Overrides the breakpoint budget used for every composition.
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn maps(&self) -> &[PwlFunction] {
        &self.maps
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn word(&self, indices: Vec<usize>) -> Result<Word> {
        if let Some(i) = indices.iter().find(|&&i| i >= self.maps.len()) {
            return Err(invalid(format!("map index {i} out of range")));
        }
        Ok(Word(indices))
    }

    pub(crate) fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    /// Applies one randomly drawn map to `x`.
    pub(crate) fn step(&self, x: &Rational, rng: &mut StreamRng) -> Rational {
        self.maps[self.draw(rng)].eval_in_unit(x)
    }

    pub(crate) fn sample_word_from(&self, length: usize, rng: &mut StreamRng) -> Word {
        Word((0..length).map(|_| self.draw(rng)).collect())
    }

    /// i.i.d. letters drawn from the weights; deterministic in `seed`.
    pub fn sample_word(&self, length: usize, seed: u64) -> Word {
        self.sample_word_from(length, &mut stream_rng(seed, 0))
    }

    /// `g_{w₁} ∘ g_{w₂} ∘ … ∘ g_{wₙ}`: later letters act first.
    pub fn inner_composition(&self, word: &Word) -> Result<PwlFunction> {
        let (first, rest) = word
            .0
            .split_first()
            .ok_or_else(|| Error::Precondition("empty word".into()))?;
        let mut acc = self.maps[*first].clone();
        for &i in rest {
            acc = acc.compose_with_budget(&self.maps[i], self.budget)?;
        }
        Ok(acc)
    }

    /// Forward orbit `xᵢ = g_{wᵢ}(x_{i-1})`: earlier letters act first.
    pub fn orbit(&self, x0: &Rational, word: &Word) -> Result<Vec<Rational>> {
        if x0.is_negative() || *x0 > Rational::one() {
            return Err(Error::Domain(x0.clone()));
        }
        let mut x = x0.clone();
        Ok(word
            .0
            .iter()
            .map(|&i| {
                x = self.maps[i].eval_in_unit(&x);
                x.clone()
            })
            .collect())
    }

    pub fn variation_trace(&self, word: &Word) -> Result<VariationTrace> {
        let (first, rest) = word
            .0
            .split_first()
            .ok_or_else(|| Error::Precondition("empty word".into()))?;
        let mut acc = self.maps[*first].clone();
        let mut variations = Vec::with_capacity(word.len());
        variations.push(acc.variation());
        for &i in rest {
            acc = acc.compose_with_budget(&self.maps[i], self.budget)?;
            variations.push(acc.variation());
        }
        let sup = variations.iter().max().expect("nonempty").clone();
        Ok(VariationTrace {
            word: word.clone(),
            variations,
            sup,
        })
    }

    /// Samples word number `index` of a (BV) estimate and returns its
    /// `sup_{n ≤ horizon} V_n`.
    pub fn bv_sample(&self, horizon: usize, seed: u64, index: u64) -> SampleOutcome {
        let word = self.sample_word_from(horizon, &mut stream_rng(seed, index));
        match self.variation_trace(&word) {
            Ok(t) => SampleOutcome::Completed { sup: t.sup },
            Err(_) => SampleOutcome::BudgetExceeded,
        }
    }

    /// Estimates `μ^⊗N(sup_{n ≤ N} V_n < K)` from `samples` words.
    pub fn bv_probability_estimate(
        &self,
        threshold: &Rational,
        horizon: usize,
        samples: usize,
        seed: u64,
    ) -> Result<BvReport> {
        check_bv_params(threshold, horizon, samples)?;
        let outcomes = (0..samples as u64).map(|i| self.bv_sample(horizon, seed, i));
        Ok(BvReport::from_outcomes(threshold.clone(), horizon, seed, outcomes))
    }
}

pub fn check_bv_params(threshold: &Rational, horizon: usize, samples: usize) -> Result<()> {
    if !threshold.is_positive() {
        return Err(Error::Precondition(format!("threshold {threshold} must be positive")));
    }
    if horizon == 0 || samples == 0 {
        return Err(Error::Precondition("horizon and sample count must be at least 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn pwl(pts: &[(&str, &str)]) -> PwlFunction {
        PwlFunction::from_points(pts.iter().map(|(x, y)| (r(x), r(y)))).unwrap()
    }

    fn tent() -> PwlFunction {
        pwl(&[("0", "0"), ("1/2", "1"), ("1", "0")])
    }

    fn halving() -> PwlFunction {
        pwl(&[("0", "0"), ("1", "1/2")])
    }

    #[test]
    fn validation() {
        let two = || vec![PwlFunction::identity(), tent()];
        let names = || vec!["a".into(), "b".into()];
        assert!(FunctionSystem::new(two(), vec![r("1"), r("0")], names()).is_err());
        assert!(FunctionSystem::new(two(), vec![r("1/2"), r("1/3")], names()).is_err());
        assert!(FunctionSystem::new(two(), vec![r("1/2"), r("1/2")], vec!["a".into(), "a".into()]).is_err());
        assert!(FunctionSystem::new(vec![], vec![], vec![]).is_err());
        assert!(FunctionSystem::new(two(), vec![r("1/2"), r("1/2")], names()).is_ok());
    }

    #[test]
    fn single_map_words() {
        let sys = FunctionSystem::uniform(vec![tent()]).unwrap();
        for seed in 0..5 {
            assert_eq!(sys.sample_word(5, seed).indices(), &[0, 0, 0, 0, 0]);
        }
    }

    #[test]
    fn fair_coin_frequency() {
        let sys = FunctionSystem::uniform(vec![tent(), halving()]).unwrap();
        let w = sys.sample_word(100_000, 11);
        let zeros = w.indices().iter().filter(|&&i| i == 0).count() as f64 / 1e5;
        assert!((zeros - 0.5).abs() < 0.01, "{zeros}");
    }

    #[test]
    fn orbit_of_halving() {
        let sys = FunctionSystem::uniform(vec![halving()]).unwrap();
        let w = sys.word(vec![0; 4]).unwrap();
        assert_eq!(sys.orbit(&r("1"), &w).unwrap(), vec![r("1/2"), r("1/4"), r("1/8"), r("1/16")]);
        assert!(sys.orbit(&r("1"), &sys.word(vec![]).unwrap()).unwrap().is_empty());
        assert_eq!(sys.orbit(&r("2"), &w), Err(Error::Domain(r("2"))));
    }

    #[test]
    fn inner_composition_orders_letters() {
        let sys = FunctionSystem::uniform(vec![tent(), halving()]).unwrap();
        let w = sys.word(vec![0, 1]).unwrap();
        // tent(halving(x)) = x on [0, 1].
        assert_eq!(sys.inner_composition(&w).unwrap(), PwlFunction::identity());
        let x0 = r("3/7");
        let orbit = sys.orbit(&x0, &w.reversed()).unwrap();
        assert_eq!(orbit.last().unwrap(), &sys.inner_composition(&w).unwrap().evaluate(&x0).unwrap());
        assert!(sys.inner_composition(&sys.word(vec![]).unwrap()).is_err());
    }

    #[test]
    fn tent_variations_double() {
        let sys = FunctionSystem::uniform(vec![tent()]).unwrap();
        let t = sys.variation_trace(&sys.word(vec![0; 5]).unwrap()).unwrap();
        assert_eq!(t.variations, vec![r("2"), r("4"), r("8"), r("16"), r("32")]);
        assert_eq!(t.sup, r("32"));
    }

    #[test]
    fn tent_never_below_large_threshold() {
        let sys = FunctionSystem::uniform(vec![tent()]).unwrap();
        let rep = sys.bv_probability_estimate(&r("100"), 10, 20, 0).unwrap();
        assert_eq!(rep.fraction_below, 0.0);
        assert_eq!(rep.max_observed_sup, Some(r("1024")));
    }

    #[test]
    fn budget_overflow_is_tallied() {
        let sys = FunctionSystem::uniform(vec![tent()]).unwrap().with_budget(100);
        let rep = sys.bv_probability_estimate(&r("10000"), 10, 3, 0).unwrap();
        assert_eq!(rep.budget_exceeded, 3);
        assert_eq!(rep.below_count, 0);
        assert_eq!(rep.max_observed_sup, None);
    }

    #[test]
    fn bv_parameters_are_checked() {
        let sys = FunctionSystem::uniform(vec![tent()]).unwrap();
        assert!(sys.bv_probability_estimate(&r("0"), 10, 3, 0).is_err());
        assert!(sys.bv_probability_estimate(&r("1"), 0, 3, 0).is_err());
        assert!(sys.bv_probability_estimate(&r("1"), 1, 0, 0).is_err());
    }
}
