//! Group-based OPH: the flat sketch viewed as `n` groups of `k'` bins,
//! compared progressively. After each group the filter computes the average
//! match count the remaining groups would have to deliver and
//! terminates as soon as reaching it (or failing to) becomes a small
//! probability event under `Binomial(k', T)`.
//!
//! Filtering works on raw matched counts; the empty-bin-corrected estimator
//! is applied only when the comparison runs through all groups.

use crate::binomial::{BinomialModel, TailTable};
use crate::error::{Error, Result};
use crate::oph::{match_stats, EmptyBinMode};
use crate::real::Real;
use crate::sketch::{BinValue, Sketch};
use crate::verdict::{
    ComparisonVerdict, Decision, FilterAction, FilterParams, FilterTrace, GroupRecord,
};

/// A flat sketch reinterpreted as `groups` consecutive blocks of
/// `bins_per_group` bins.
#[derive(Debug, Clone, Copy)]
pub struct GroupedSketchView<'a> {
    sketch: &'a Sketch,
    groups: usize,
    bins_per_group: usize,
}

impl<'a> GroupedSketchView<'a> {
    pub fn new(sketch: &'a Sketch, groups: usize, bins_per_group: usize) -> Result<Self> {
        if groups == 0 || bins_per_group == 0 {
            return Err(Error::invalid("groups and bins per group must be >= 1"));
        }
        if groups * bins_per_group != sketch.layout().bin_count() {
            return Err(Error::invalid(format!(
                "{} groups of {} bins do not cover a {}-bin sketch",
                groups,
                bins_per_group,
                sketch.layout().bin_count()
            )));
        }
        Ok(Self { sketch, groups, bins_per_group })
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn bins_per_group(&self) -> usize {
        self.bins_per_group
    }

    pub fn sketch(&self) -> &Sketch {
        self.sketch
    }

    /// Bin values of group `l` (0-based).
    pub fn group_values(&self, l: usize) -> &[BinValue] {
        let start = l * self.bins_per_group;
        &self.sketch.values()[start..start + self.bins_per_group]
    }
}

fn matched_in(a: &[BinValue], b: &[BinValue]) -> usize {
    a.iter()
        .zip(b)
        .filter(|(x, y)| match (x, y) {
            (BinValue::Offset(u), BinValue::Offset(v)) => u == v,
            _ => false,
        })
        .count()
}

/// Progressive comparison with early termination.
///
/// After group `l` (of `n`), with `m` matches banked so far, the average
/// the remaining groups must deliver is `need = (n*k'*T - m) / (n - l)`:
/// - `need <= 0`: the requirement is already met, accept.
/// - `need > k'`: the requirement is infeasible, reject.
/// - `need` below the per-group target `k'*T`: accept early if
///   `P(X <= floor(need)) <= epsilon`.
/// - otherwise: reject early if `P(X >= ceil(need)) <= epsilon`.
///
/// Fractional requirements are floored for lower tails and ceiled for upper
/// tails, which never terminates on a weaker event than stated.
///
/// If no group triggers termination, the verdict is the empty-corrected
/// estimator over all bins against `T`, and the estimate is attached.
pub fn compare<F: Real>(
    a: &GroupedSketchView,
    b: &GroupedSketchView,
    params: &FilterParams<F>,
    mode: EmptyBinMode,
) -> Result<(ComparisonVerdict<F>, FilterTrace<F>)> {
    params.validate()?;
    // T = 1 leaves no binomial slack; only the certainty guards can fire.
    let tails = if params.threshold < F::one() {
        Some(TailTable::new(&BinomialModel::new(params.bins_per_group, params.threshold)?))
    } else {
        None
    };
    compare_with_tails(a, b, params, mode, tails.as_ref())
}

/// [`compare`] with the tail table supplied by the caller, so corpus runs
/// build it once instead of per pair. `tails` must match
/// `(params.bins_per_group, params.threshold)`; pass `None` only for
/// `T = 1`, where no tail can fire.
pub fn compare_with_tails<F: Real>(
    a: &GroupedSketchView,
    b: &GroupedSketchView,
    params: &FilterParams<F>,
    mode: EmptyBinMode,
    tails: Option<&TailTable<F>>,
) -> Result<(ComparisonVerdict<F>, FilterTrace<F>)> {
    params.validate()?;
    a.sketch.check_comparable(b.sketch)?;
    if a.groups != b.groups || a.bins_per_group != b.bins_per_group {
        return Err(Error::incompatible("grouped views disagree on grouping"));
    }
    if a.groups != params.groups || a.bins_per_group != params.bins_per_group {
        return Err(Error::invalid(format!(
            "params expect {} groups of {} bins, views have {} of {}",
            params.groups, params.bins_per_group, a.groups, a.bins_per_group
        )));
    }
    if let Some(t) = tails {
        if t.trials() != params.bins_per_group {
            return Err(Error::invalid("tail table built for a different group size"));
        }
    }

    let n = a.groups;
    let kp = a.bins_per_group;
    let threshold = params.threshold;
    let per_group_target = F::from_count(kp) * threshold;
    let total_required = F::from_count(n * kp) * threshold;
    let kp_f = F::from_count(kp);

    let mut trace = FilterTrace::default();
    let mut matched = 0usize;

    for l in 1..=n {
        matched += matched_in(a.group_values(l - 1), b.group_values(l - 1));
        if l == n {
            break;
        }
        let need = (total_required - F::from_count(matched)) / F::from_count(n - l);

        let mut record = GroupRecord {
            group: l,
            cumulative_matches: matched,
            required: Some(need),
            tail: None,
            action: FilterAction::Continue,
        };

        if need <= F::zero() {
            record.action = FilterAction::AcceptEarly;
            trace.records.push(record);
            return Ok((early(Decision::Similar, l), trace));
        }
        if need > kp_f {
            record.action = FilterAction::RejectEarly;
            trace.records.push(record);
            return Ok((early(Decision::NotSimilar, l), trace));
        }
        if let Some(tails) = tails {
            if need < per_group_target {
                let tail = tails.lower_tail(need.floor().to_i64().unwrap())?;
                record.tail = Some(tail);
                if tail <= params.epsilon {
                    record.action = FilterAction::AcceptEarly;
                    trace.records.push(record);
                    return Ok((early(Decision::Similar, l), trace));
                }
            } else {
                let tail = tails.upper_tail(need.ceil().to_i64().unwrap())?;
                record.tail = Some(tail);
                if tail <= params.epsilon {
                    record.action = FilterAction::RejectEarly;
                    trace.records.push(record);
                    return Ok((early(Decision::NotSimilar, l), trace));
                }
            }
        }
        trace.records.push(record);
    }

    // Full comparison: empty-corrected estimator over every bin.
    let stats = match_stats(a.sketch, b.sketch, mode)?;
    let est: F = crate::oph::estimate(&stats)?;
    trace.records.push(GroupRecord {
        group: n,
        cumulative_matches: matched,
        required: None,
        tail: None,
        action: FilterAction::FinalVerdict,
    });
    let decision = if est >= threshold { Decision::Similar } else { Decision::NotSimilar };
    Ok((
        ComparisonVerdict {
            decision,
            groups_compared: n,
            terminated_early: false,
            estimate: Some(est),
        },
        trace,
    ))
}

fn early<F>(decision: Decision, groups_compared: usize) -> ComparisonVerdict<F> {
    ComparisonVerdict { decision, groups_compared, terminated_early: true, estimate: None }
}
