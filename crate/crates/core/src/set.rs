use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A document (or image) as a set of integer feature IDs drawn from a
/// vocabulary `[0, vocab_size)`.
///
/// IDs are stored strictly increasing; the set may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    ids: Vec<u32>,
    vocab_size: u32,
}

impl FeatureSet {
    /// Builds a feature set from already-sorted, duplicate-free IDs.
    pub fn new(ids: Vec<u32>, vocab_size: u32) -> Result<Self> {
        if !ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("feature ids must be strictly increasing"));
        }
        if let Some(&last) = ids.last() {
            if last >= vocab_size {
                return Err(Error::invalid(format!(
                    "feature id {last} outside vocabulary of size {vocab_size}"
                )));
            }
        }
        Ok(Self { ids, vocab_size })
    }

    /// Builds a feature set from IDs in any order, deduplicating.
    pub fn from_unsorted(mut ids: Vec<u32>, vocab_size: u32) -> Result<Self> {
        ids.sort_unstable();
        ids.dedup();
        Self::new(ids, vocab_size)
    }

    pub fn empty(vocab_size: u32) -> Self {
        Self { ids: Vec::new(), vocab_size }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    /// Sizes of intersection and union with `other`, by sorted merge.
    pub fn overlap_counts(&self, other: &FeatureSet) -> (usize, usize) {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.ids, &other.ids);
        let mut inter = 0;
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    inter += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let union = a.len() + b.len() - inter;
        (inter, union)
    }
}
