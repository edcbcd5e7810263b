//! Classical k-permutation minwise hashing, kept as the accuracy/latency
//! baseline. Permutations are materialized, so its preprocessing cost is
//! the real thing, not a hash approximation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::real::Real;
use crate::set::FeatureSet;
use crate::sketch::MinHashSketch;

/// Holds the `k` materialized permutations so a corpus can be sketched
/// without regenerating them per document.
#[derive(Debug)]
pub struct MinHasher {
    seeds: Vec<u64>,
    perms: Vec<Permutation>,
    vocab_size: u32,
}

impl MinHasher {
    /// Generates one permutation per seed. Seeds must be distinct so the
    /// permutations are independent. Generation is parallel; the result
    /// depends only on the seed order, not the scheduling.
    pub fn new(seeds: Vec<u64>, vocab_size: u32) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::invalid("minhash needs at least one seed"));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("minhash seeds must be distinct"));
        }
        let perms = seeds
            .par_iter()
            .map(|&s| Permutation::generate(s, vocab_size))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { seeds, perms, vocab_size })
    }

    /// Derives `k` distinct seeds from a master seed.
    pub fn from_master_seed(master: u64, k: usize, vocab_size: u32) -> Result<Self> {
        let seeds = (0..k as u64).map(|i| crate::mix_seed(master, i)).collect();
        Self::new(seeds, vocab_size)
    }

    /// Wraps explicit permutations (fixtures, identity-permutation tests).
    /// All permutations must share one size.
    pub fn from_permutations(perms: Vec<Permutation>) -> Result<Self> {
        let first = perms.first().ok_or_else(|| Error::invalid("need at least one permutation"))?;
        let vocab_size = first.size();
        if perms.iter().any(|p| p.size() != vocab_size) {
            return Err(Error::invalid("permutations disagree on size"));
        }
        let seeds = perms.iter().map(|p| p.key().seed).collect();
        Ok(Self { seeds, perms, vocab_size })
    }

    pub fn num_permutations(&self) -> usize {
        self.perms.len()
    }

    /// Fingerprint `i` is the minimum of permutation `i` over the set.
    pub fn sketch(&self, s: &FeatureSet) -> Result<MinHashSketch> {
        if s.vocab_size() != self.vocab_size {
            return Err(Error::invalid(format!(
                "set vocabulary {} does not match hasher vocabulary {}",
                s.vocab_size(),
                self.vocab_size
            )));
        }
        if s.is_empty() {
            return Err(Error::UndefinedSketch(
                "minhash of an empty set is undefined".into(),
            ));
        }
        let fingerprints = self
            .perms
            .iter()
            .map(|p| s.ids().iter().map(|&e| p.map(e)).min().expect("non-empty set"))
            .collect();
        Ok(MinHashSketch::new(self.seeds.clone(), self.vocab_size, fingerprints))
    }
}

/// One-shot sketch without keeping the hasher around.
pub fn sketch(s: &FeatureSet, seeds: &[u64], vocab_size: u32) -> Result<MinHashSketch> {
    MinHasher::new(seeds.to_vec(), vocab_size)?.sketch(s)
}

/// Fraction of positions with equal fingerprints.
pub fn estimate<F: Real>(a: &MinHashSketch, b: &MinHashSketch) -> Result<F> {
    if a.seeds() != b.seeds() || a.vocab_size() != b.vocab_size() {
        return Err(Error::incompatible("minhash sketches use different seeds"));
    }
    let equal = a
        .fingerprints()
        .iter()
        .zip(b.fingerprints())
        .filter(|(x, y)| x == y)
        .count();
    Ok(F::from_count(equal) / F::from_count(a.len()))
}
