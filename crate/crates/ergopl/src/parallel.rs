//! Multi-threaded versions of the sampling-heavy operations. Word `i` always
//! comes from random stream `i`, so results match the sequential versions
//! for any number of worker threads.

use ergopl_core::constructions::{f2_prefixed_word, verify_compensation_with_words, word_check_from};
use ergopl_core::system::check_bv_params;
use ergopl_core::{
    estimate_stationary, BvReport, CompensationPair, CompensationReport, FunctionSystem, Rational, Result,
    SampleOutcome, StationaryEstimate,
};
use rayon::prelude::*;

pub fn bv_outcomes(system: &FunctionSystem, horizon: usize, samples: usize, seed: u64) -> Vec<SampleOutcome> {
    (0..samples as u64)
        .into_par_iter()
        .map(|i| system.bv_sample(horizon, seed, i))
        .collect()
}

pub fn bv_probability_estimate(
    system: &FunctionSystem,
    threshold: &Rational,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<BvReport> {
    check_bv_params(threshold, horizon, samples)?;
    let outcomes = bv_outcomes(system, horizon, samples, seed);
    Ok(BvReport::from_outcomes(threshold.clone(), horizon, seed, outcomes))
}

pub fn verify_compensation(
    pair: &CompensationPair,
    max_m: usize,
    word_samples: usize,
    word_length: usize,
    seed: u64,
) -> Result<CompensationReport> {
    let system = pair.system(&Rational::new(1, 2))?;
    let traces: Vec<_> = (0..word_samples as u64)
        .into_par_iter()
        .map(|i| {
            let w = f2_prefixed_word(&system, word_length, seed, i);
            let sup = system.variation_trace(&w).map(|t| t.sup);
            (w, sup)
        })
        .collect();
    verify_compensation_with_words(pair, max_m, word_check_from(word_length, traces))
}

/// Independent chains, one per `(x0, seed)` pair.
pub fn stationary_chains(
    system: &FunctionSystem,
    starts: &[(Rational, u64)],
    burn_in: usize,
    samples: usize,
) -> Result<Vec<StationaryEstimate>> {
    starts
        .par_iter()
        .map(|(x0, seed)| estimate_stationary(system, x0, burn_in, samples, *seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ergopl_core::{build_compensation, build_tableaux_example, CompensationParams};

    #[test]
    fn matches_sequential_estimate() {
        let (sys, _) = build_tableaux_example();
        let k = Rational::from_integer(2);
        let par = bv_probability_estimate(&sys, &k, 12, 64, 5).unwrap();
        let seq = sys.bv_probability_estimate(&k, 12, 64, 5).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let (sys, _) = build_tableaux_example();
        let k = Rational::from_integer(1);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| bv_probability_estimate(&sys, &k, 10, 40, 9).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn compensation_matches_sequential() {
        let pair = build_compensation(&CompensationParams::default().with_depth(2)).unwrap();
        let par = verify_compensation(&pair, 3, 8, 10, 1).unwrap();
        let seq = ergopl_core::verify_compensation(&pair, 3, 8, 10, 1).unwrap();
        assert_eq!(par, seq);
    }
}
