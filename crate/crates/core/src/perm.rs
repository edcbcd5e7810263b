use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::FeatureSet;

/// Identifies the permutation a sketch was built with. Sketches are only
/// comparable when their keys are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermKey {
    pub seed: u64,
    pub size: u32,
    pub identity: bool,
}

/// A seeded bijection on `[0, size)`, materialized as an array.
///
/// Materializing keeps the exactness of the permutation model: distinct
/// inputs can never collide, which hash-based substitutes do not guarantee.
#[derive(Debug, Clone)]
pub struct Permutation {
    mapping: Vec<u32>,
    key: PermKey,
}

impl Permutation {
    /// Generates the permutation for `(seed, size)` with a seeded uniform
    /// shuffle. Deterministic: the same pair always yields the same mapping.
    pub fn generate(seed: u64, size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("permutation size must be >= 1"));
        }
        let mut mapping: Vec<u32> = (0..size).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        mapping.shuffle(&mut rng);
        Ok(Self {
            mapping,
            key: PermKey { seed, size, identity: false },
        })
    }

    /// The identity permutation, used by the worked-example fixtures.
    pub fn identity(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("permutation size must be >= 1"));
        }
        Ok(Self {
            mapping: (0..size).collect(),
            key: PermKey { seed: 0, size, identity: true },
        })
    }

    pub fn size(&self) -> u32 {
        self.key.size
    }

    pub fn key(&self) -> PermKey {
        self.key
    }

    pub fn map(&self, id: u32) -> u32 {
        self.mapping[id as usize]
    }

    pub fn mapping(&self) -> &[u32] {
        &self.mapping
    }

    /// Applies the permutation to a feature set and re-sorts.
    pub fn apply_set(&self, s: &FeatureSet) -> Result<FeatureSet> {
        if s.vocab_size() != self.key.size {
            return Err(Error::invalid(format!(
                "set vocabulary {} does not match permutation size {}",
                s.vocab_size(),
                self.key.size
            )));
        }
        let mapped: Vec<u32> = s.ids().iter().map(|&e| self.map(e)).collect();
        FeatureSet::from_unsorted(mapped, self.key.size)
    }
}
