//! Seeded randomness. Every random stream is a pure function of
//! `(seed, stream)`, so work can be split across threads without changing
//! results.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rational::Rational;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Exact categorical sampler over rational weights.
///
/// Weights are scaled to integers over their common denominator and an
/// integer is drawn uniformly below it, so no rounding enters the draw.
#[derive(Debug, Clone)]
pub(crate) enum WeightSampler {
    Word { total: u64, cumulative: Vec<u64> },
    Big { total: BigUint, cumulative: Vec<BigUint> },
}

impl WeightSampler {
    /// `weights` must be positive and sum to one.
    pub(crate) fn new(weights: &[Rational]) -> Self {
        let common = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(&w.denom()));
        let mut running = BigInt::from(0u8);
        let mut cumulative = Vec::with_capacity(weights.len());
        for w in weights {
            running += w.numer() * (&common / w.denom());
            cumulative.push(running.to_biguint().expect("positive weights"));
        }
        let total = common.to_biguint().expect("positive denominator");
        match (total.to_u64(), cumulative.iter().map(|c| c.to_u64()).collect::<Option<Vec<_>>>()) {
            (Some(total), Some(cumulative)) => WeightSampler::Word { total, cumulative },
            _ => WeightSampler::Big { total, cumulative },
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            WeightSampler::Word { total, cumulative } => {
                let u = rng.gen_range(0..*total);
                cumulative.partition_point(|&c| c <= u)
            }
            WeightSampler::Big { total, cumulative } => {
                let u = rng.gen_biguint_below(total);
                cumulative.partition_point(|c| *c <= u)
            }
        }
    }
}
