//! Shared parameter and outcome types for the early-termination filters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Filter configuration: similarity threshold `T`, error tolerance
/// `epsilon`, and the grouping the filter walks (`bins_per_group` = k',
/// `groups` = n; the hierarchical comparison takes its grouping from the
/// layout and ignores `groups`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams<F> {
    pub threshold: F,
    pub epsilon: F,
    pub bins_per_group: usize,
    pub groups: usize,
}

impl<F: Real> FilterParams<F> {
    pub fn new(threshold: F, epsilon: F, bins_per_group: usize, groups: usize) -> Result<Self> {
        let p = Self { threshold, epsilon, bins_per_group, groups };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > F::zero() && self.threshold <= F::one()) {
            return Err(Error::invalid("threshold must lie in (0, 1]"));
        }
        if !(self.epsilon > F::zero() && self.epsilon < F::one()) {
            return Err(Error::invalid("epsilon must lie in (0, 1)"));
        }
        if self.bins_per_group == 0 || self.groups == 0 {
            return Err(Error::invalid("bins per group and group count must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Similar,
    NotSimilar,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Decision::Similar => write!(f, "similar"),
            Decision::NotSimilar => write!(f, "not-similar"),
        }
    }
}

/// Outcome of one pair comparison. `estimate` is present exactly when the
/// comparison ran to completion (no early termination).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict<F> {
    pub decision: Decision,
    pub groups_compared: usize,
    pub terminated_early: bool,
    pub estimate: Option<F>,
}

/// What the filter did after looking at one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterAction {
    Continue,
    AcceptEarly,
    RejectEarly,
    /// Last group reached; the verdict came from the full estimator.
    FinalVerdict,
}

/// Per-group diagnostic record.
///
/// `required` is the requirement put on the remaining groups: an average
/// match count for the flat grouped filter, a match rate for the
/// hierarchical one. It is absent on the final group, where no remaining
/// requirement exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord<F> {
    pub group: usize,
    pub cumulative_matches: usize,
    pub required: Option<F>,
    pub tail: Option<F>,
    pub action: FilterAction,
}

/// Trace of a filtered comparison: one record per compared group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterTrace<F> {
    pub records: Vec<GroupRecord<F>>,
}

impl<F> Default for FilterTrace<F> {
    fn default() -> Self {
        Self { records: Vec::new() }
    }
}
