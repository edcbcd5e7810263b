//! Bin layouts: the partition of the (permuted) ID space that a sketch
//! samples from.
//!
//! Flat layouts cut `[0, |V|)` into `k` near-equal bins with the floor rule
//! `start_i = floor(i * |V| / k)`. Hierarchical layouts repeatedly split the
//! space front/back in an `a:b` ratio; every front part becomes a group of
//! `k'` bins and the final remainder absorbs the residue.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Flat partition of `[0, vocab_size)` into `bins` bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatBinLayout {
    vocab_size: u32,
    bins: usize,
}

impl FlatBinLayout {
    pub fn new(vocab_size: u32, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("bin count must be >= 1"));
        }
        if bins as u64 > vocab_size as u64 {
            return Err(Error::invalid(format!(
                "bin count {bins} exceeds vocabulary size {vocab_size}"
            )));
        }
        Ok(Self { vocab_size, bins })
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn bin_count(&self) -> usize {
        self.bins
    }

    /// Start of bin `i`; `bin_start(bins)` is `vocab_size`.
    pub fn bin_start(&self, i: usize) -> u32 {
        debug_assert!(i <= self.bins);
        ((i as u64 * self.vocab_size as u64) / self.bins as u64) as u32
    }

    pub fn bin_len(&self, i: usize) -> u32 {
        self.bin_start(i + 1) - self.bin_start(i)
    }

    /// Bin index holding `id`.
    pub fn bin_of(&self, id: u32) -> usize {
        debug_assert!(id < self.vocab_size);
        // Largest i with floor(i*V/k) <= id.
        (((id as u64 + 1) * self.bins as u64 - 1) / self.vocab_size as u64) as usize
    }
}

/// A contiguous range `[start, start + len)` of the ID space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRange {
    pub start: u32,
    pub len: u32,
}

/// Hierarchical partition: ordered groups produced by recursive `a:b`
/// splits, each holding `bins_per_group` bins under the flat floor rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchicalBinLayout {
    vocab_size: u32,
    ratio_a: u32,
    ratio_b: u32,
    bins_per_group: usize,
    groups: Vec<GroupRange>,
}

impl HierarchicalBinLayout {
    /// Splits `[0, vocab_size)` with ratio `a:b`: the front part
    /// `floor(a/(a+b) * remaining)` becomes the next group, the back part is
    /// split again. Splitting stops when it would leave either part at
    /// `bins_per_group` or fewer slots; the whole remainder then becomes the
    /// final group.
    pub fn new(vocab_size: u32, ratio_a: u32, ratio_b: u32, bins_per_group: usize) -> Result<Self> {
        if ratio_a == 0 || ratio_b == 0 {
            return Err(Error::invalid("split ratio parts must be >= 1"));
        }
        if bins_per_group == 0 {
            return Err(Error::invalid("bins per group must be >= 1"));
        }
        if (vocab_size as u64) < 2 * bins_per_group as u64 {
            return Err(Error::invalid(format!(
                "vocabulary size {vocab_size} too small for two groups of {bins_per_group} bins"
            )));
        }
        let kp = bins_per_group as u64;
        let mut groups = Vec::new();
        let mut start = 0u64;
        let mut remaining = vocab_size as u64;
        loop {
            let front = remaining * ratio_a as u64 / (ratio_a + ratio_b) as u64;
            let back = remaining - front;
            if front <= kp || back <= kp {
                groups.push(GroupRange { start: start as u32, len: remaining as u32 });
                break;
            }
            groups.push(GroupRange { start: start as u32, len: front as u32 });
            start += front;
            remaining = back;
        }
        Ok(Self { vocab_size, ratio_a, ratio_b, bins_per_group, groups })
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn ratio(&self) -> (u32, u32) {
        (self.ratio_a, self.ratio_b)
    }

    pub fn bins_per_group(&self) -> usize {
        self.bins_per_group
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[GroupRange] {
        &self.groups
    }

    pub fn total_bins(&self) -> usize {
        self.groups.len() * self.bins_per_group
    }

    /// Start of bin `i` within group `g`, floor rule applied to the group
    /// range. `bin_start(g, bins_per_group)` is the group end.
    pub fn bin_start(&self, group: usize, i: usize) -> u32 {
        let r = self.groups[group];
        r.start + ((i as u64 * r.len as u64) / self.bins_per_group as u64) as u32
    }

    /// Estimator weight of each group: the share of the space the idealized
    /// (un-floored) split assigns it, `w_j = a*b^(j-1)/(a+b)^j` with the
    /// final group taking `(b/(a+b))^l`. Weights are positive and sum to 1.
    pub fn group_weights<F: Real>(&self) -> Vec<F> {
        let r = F::from_u32(self.ratio_a).unwrap()
            / F::from_u32(self.ratio_a + self.ratio_b).unwrap();
        let one = F::one();
        let mut weights = Vec::with_capacity(self.groups.len());
        let mut tail = one; // mass not yet assigned
        for _ in 0..self.groups.len() - 1 {
            weights.push(r * tail);
            tail = tail * (one - r);
        }
        weights.push(tail);
        weights
    }
}
