use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::FlatBinLayout;
use crate::perm::PermKey;

/// Value recorded for one bin: the smallest permuted element's offset from
/// the bin start, or `Empty` when the set misses the bin entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinValue {
    Empty,
    Offset(u32),
}

impl BinValue {
    pub fn is_empty(&self) -> bool {
        matches!(self, BinValue::Empty)
    }
}

impl std::fmt::Display for BinValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BinValue::Empty => write!(f, "-"),
            BinValue::Offset(u) => write!(f, "{u}"),
        }
    }
}

/// A one-permutation sketch over a flat bin layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    layout: FlatBinLayout,
    perm: PermKey,
    values: Vec<BinValue>,
}

impl Sketch {
    /// Assembles a sketch from raw parts (used by file loading and tests).
    pub fn from_parts(layout: FlatBinLayout, perm: PermKey, values: Vec<BinValue>) -> Result<Self> {
        if values.len() != layout.bin_count() {
            return Err(Error::invalid(format!(
                "sketch has {} values for a {}-bin layout",
                values.len(),
                layout.bin_count()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if let BinValue::Offset(u) = v {
                if *u >= layout.bin_len(i) {
                    return Err(Error::invalid(format!(
                        "offset {u} out of range for bin {i} of length {}",
                        layout.bin_len(i)
                    )));
                }
            }
        }
        Ok(Self { layout, perm, values })
    }

    pub fn layout(&self) -> &FlatBinLayout {
        &self.layout
    }

    pub fn perm_key(&self) -> PermKey {
        self.perm
    }

    pub fn values(&self) -> &[BinValue] {
        &self.values
    }

    /// Checks that `other` was built over the same layout and permutation;
    /// comparing sketches that disagree here is a caller bug surfaced as an
    /// error, never a silent wrong answer.
    pub fn check_comparable(&self, other: &Sketch) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::incompatible("bin layouts differ"));
        }
        if self.perm != other.perm {
            return Err(Error::incompatible("permutation seeds differ"));
        }
        Ok(())
    }
}

/// Classical minwise sketch: one minimum per independent permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinHashSketch {
    seeds: Vec<u64>,
    vocab_size: u32,
    fingerprints: Vec<u32>,
}

impl MinHashSketch {
    pub(crate) fn new(seeds: Vec<u64>, vocab_size: u32, fingerprints: Vec<u32>) -> Self {
        Self { seeds, vocab_size, fingerprints }
    }

    pub fn fingerprints(&self) -> &[u32] {
        &self.fingerprints
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn len(&self) -> usize {
        self.fingerprints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fingerprints.is_empty()
    }
}
