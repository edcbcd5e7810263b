//! Near-duplicate detection for sets of integer feature IDs.
//!
//! The toolkit builds minwise-hashing sketches and compares them against a
//! similarity threshold:
//!
//! - [`minhash`]: the classical k-permutation baseline;
//! - [`oph`]: one-permutation hashing (single permutation, `k` bins,
//!   smallest within-bin offset per bin);
//! - [`goph`]: the flat OPH sketch walked group by group with
//!   binomial-tail early termination;
//! - [`hoph`]: hierarchical grouping from recursive `a:b` splits of the
//!   vocabulary, so the first groups carry most of the estimator mass and
//!   dissimilar pairs die after one group.
//!
//! [`corpus`] supplies ingestion (feature-set files, text shingling), the
//! exact-Jaccard oracle, and synthetic workload generation; [`detect`] runs
//! whole-corpus near-duplicate queries with precision/recall scoring.
//!
//! Everything real-valued is generic over the scalar type via [`Real`]
//! (`f32` or `f64`); the `*64` aliases below fix the common choice.

pub mod binomial;
pub mod corpus;
pub mod detect;
pub mod error;
pub mod files;
pub mod goph;
pub mod hoph;
pub mod layout;
pub mod minhash;
pub mod oph;
pub mod perm;
pub mod real;
pub mod set;
pub mod sketch;
pub mod verdict;

pub use error::{Error, Result};
pub use layout::{FlatBinLayout, GroupRange, HierarchicalBinLayout};
pub use oph::{BinMatchStats, EmptyBinMode};
pub use perm::{PermKey, Permutation};
pub use real::Real;
pub use set::FeatureSet;
pub use sketch::{BinValue, MinHashSketch, Sketch};
pub use verdict::{ComparisonVerdict, Decision, FilterAction, FilterParams, FilterTrace};

/// `f64` instantiations of the scalar-generic types.
pub type BinomialModel64 = binomial::BinomialModel<f64>;
pub type FilterParams64 = verdict::FilterParams<f64>;
pub type ComparisonVerdict64 = verdict::ComparisonVerdict<f64>;
pub type FilterTrace64 = verdict::FilterTrace<f64>;

/// Derives a stream of decorrelated seeds from a base seed (splitmix64).
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
