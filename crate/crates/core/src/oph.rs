//! One Permutation Hashing: a single permutation, the space split into `k`
//! bins, and the smallest permuted element per bin (stored as an offset
//! from the bin start) as the fingerprint.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::FlatBinLayout;
use crate::perm::Permutation;
use crate::real::Real;
use crate::set::FeatureSet;
use crate::sketch::{BinValue, Sketch};

/// How bins with an empty side are excluded from the estimator.
///
/// `JointEmpty` drops a bin only when both sketches show the empty marker.
/// `EitherEmpty` drops a bin when either side is empty; this is the
/// convention the worked examples follow and the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EmptyBinMode {
    #[default]
    EitherEmpty,
    JointEmpty,
}

impl std::str::FromStr for EmptyBinMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "either-empty" => Ok(EmptyBinMode::EitherEmpty),
            "joint-empty" => Ok(EmptyBinMode::JointEmpty),
            other => Err(Error::invalid(format!("unknown empty-bin mode '{other}'"))),
        }
    }
}

/// Matched/excluded bin counts from comparing two sketches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinMatchStats {
    pub matched: usize,
    pub excluded: usize,
    pub bins: usize,
    pub mode: EmptyBinMode,
}

/// Builds the OPH sketch of `s` under permutation `p`.
///
/// Walks the sorted permuted IDs and the bin boundaries together, so each
/// bin records the offset of its smallest permuted element or `Empty`.
pub fn sketch(s: &FeatureSet, p: &Permutation, layout: &FlatBinLayout) -> Result<Sketch> {
    if s.vocab_size() != layout.vocab_size() || p.size() != layout.vocab_size() {
        return Err(Error::invalid(format!(
            "vocabulary mismatch: set {}, permutation {}, layout {}",
            s.vocab_size(),
            p.size(),
            layout.vocab_size()
        )));
    }
    let permuted = p.apply_set(s)?;
    let k = layout.bin_count();
    let mut values = vec![BinValue::Empty; k];
    let ids = permuted.ids();
    let mut i = 0;
    for (bin, value) in values.iter_mut().enumerate() {
        let start = layout.bin_start(bin);
        let end = layout.bin_start(bin + 1);
        while i < ids.len() && ids[i] < end {
            if value.is_empty() {
                *value = BinValue::Offset(ids[i] - start);
            }
            i += 1;
        }
    }
    Sketch::from_parts(*layout, p.key(), values)
}

/// Counts matched bins (equal non-empty offsets) and excluded bins per
/// `mode` over two comparable sketches.
pub fn match_stats(a: &Sketch, b: &Sketch, mode: EmptyBinMode) -> Result<BinMatchStats> {
    a.check_comparable(b)?;
    let mut matched = 0;
    let mut excluded = 0;
    for (va, vb) in a.values().iter().zip(b.values()) {
        match (va, vb) {
            (BinValue::Empty, BinValue::Empty) => excluded += 1,
            (BinValue::Empty, _) | (_, BinValue::Empty) => {
                if mode == EmptyBinMode::EitherEmpty {
                    excluded += 1;
                }
            }
            (BinValue::Offset(x), BinValue::Offset(y)) => {
                if x == y {
                    matched += 1;
                }
            }
        }
    }
    Ok(BinMatchStats { matched, excluded, bins: a.values().len(), mode })
}

/// The estimator `N_mb / (k - N_excluded)`, in `[0, 1]`.
pub fn estimate<F: Real>(stats: &BinMatchStats) -> Result<F> {
    let usable = stats.bins - stats.excluded;
    if usable == 0 {
        return Err(Error::UndefinedEstimate(
            "all bins excluded; both sets are effectively empty".into(),
        ));
    }
    Ok(F::from_count(stats.matched) / F::from_count(usable))
}

/// Convenience: sketch-level comparison with the default pipeline.
pub fn compare<F: Real>(a: &Sketch, b: &Sketch, mode: EmptyBinMode) -> Result<F> {
    estimate(&match_stats(a, b, mode)?)
}

/// Monte-Carlo evaluation of the estimator variance
/// `R(1-R) * (E[1/(k - N_eb)] * (1 + 1/(g-1)) - 1/(g-1))`,
/// with `E[1/(k - N_eb)]` estimated by dropping the `g` union elements
/// uniformly into the `k` bins `trials` times. Deterministic for a fixed
/// seed.
pub fn variance_mc<F: Real>(
    jaccard: F,
    union_size: usize,
    bins: usize,
    trials: usize,
    seed: u64,
) -> Result<F> {
    if !(jaccard >= F::zero() && jaccard <= F::one()) {
        return Err(Error::invalid("jaccard must lie in [0, 1]"));
    }
    if union_size < 2 {
        return Err(Error::invalid("union size must be >= 2"));
    }
    if bins == 0 || trials == 0 {
        return Err(Error::invalid("bins and trials must be >= 1"));
    }
    let factor = jaccard * (F::one() - jaccard);
    if factor == F::zero() {
        return Ok(F::zero());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occupied = vec![0u32; bins];
    let mut mean_inv = F::zero();
    let mut comp = F::zero();
    for _ in 0..trials {
        occupied.iter_mut().for_each(|c| *c = 0);
        let mut empty = bins;
        for _ in 0..union_size {
            let b = rng.gen_range(0..bins);
            if occupied[b] == 0 {
                empty -= 1;
            }
            occupied[b] += 1;
        }
        let inv = F::one() / F::from_count(bins - empty);
        // Kahan accumulation of the sample mean numerator.
        let y = inv - comp;
        let t = mean_inv + y;
        comp = (t - mean_inv) - y;
        mean_inv = t;
    }
    let expect_inv = mean_inv / F::from_count(trials);
    let g1 = F::one() / F::from_count(union_size - 1);
    Ok(factor * (expect_inv * (F::one() + g1) - g1))
}
