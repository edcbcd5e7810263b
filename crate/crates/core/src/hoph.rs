//! Hierarchical OPH.
//!
//! The space is split front/back in ratio `a:b` recursively (see
//! [`HierarchicalBinLayout`]), so early groups cover geometrically more of
//! the vocabulary and carry most of the estimator mass. Each group is its
//! own `k'`-bin OPH block; the similarity estimate is the group-weight
//! convex combination of per-group OPH estimates. The progressive
//! comparison keeps a running weighted match mass and terminates once the
//! probability the remaining groups can (or cannot) close the gap to the
//! threshold drops to the tolerance.
//!
//! The matched/empty-bin aggregate statistics of the `a:b` analysis are
//! exposed as standalone functions ([`aggregate_matched`],
//! [`aggregate_empty`], [`folded_estimate`]); they follow the analysis'
//! convention of folding the last two groups together and are kept separate
//! from the default estimator, which reproduces the worked examples.
//!
//! Cost: each compared group is an `O(k')` scan plus one tail lookup, and
//! the number of groups is logarithmic in the vocabulary (base `1/(1-r)`),
//! so a full comparison touches `O(k' * log |V|)` bins. Because the first
//! group already holds `r` of the estimator mass, pairs far from the
//! threshold usually terminate after a single group; no closed-form
//! runtime predictor is provided.

use serde::{Deserialize, Serialize};

use crate::binomial::{BinomialModel, TailTable};
use crate::error::{Error, Result};
use crate::layout::HierarchicalBinLayout;
use crate::oph::EmptyBinMode;
use crate::perm::{PermKey, Permutation};
use crate::real::Real;
use crate::set::FeatureSet;
use crate::sketch::BinValue;
use crate::verdict::{
    ComparisonVerdict, Decision, FilterAction, FilterParams, FilterTrace, GroupRecord,
};

/// A hierarchical sketch: one `k'`-bin block per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HophSketch {
    layout: HierarchicalBinLayout,
    perm: PermKey,
    blocks: Vec<Vec<BinValue>>,
}

impl HophSketch {
    pub fn from_parts(
        layout: HierarchicalBinLayout,
        perm: PermKey,
        blocks: Vec<Vec<BinValue>>,
    ) -> Result<Self> {
        if blocks.len() != layout.group_count() {
            return Err(Error::invalid(format!(
                "{} blocks for a {}-group layout",
                blocks.len(),
                layout.group_count()
            )));
        }
        let kp = layout.bins_per_group();
        for (g, block) in blocks.iter().enumerate() {
            if block.len() != kp {
                return Err(Error::invalid(format!(
                    "block {g} has {} values, expected {kp}",
                    block.len()
                )));
            }
            for (i, v) in block.iter().enumerate() {
                if let BinValue::Offset(u) = v {
                    let len = layout.bin_start(g, i + 1) - layout.bin_start(g, i);
                    if *u >= len {
                        return Err(Error::invalid(format!(
                            "offset {u} out of range for bin {i} of group {g}"
                        )));
                    }
                }
            }
        }
        Ok(Self { layout, perm, blocks })
    }

    pub fn layout(&self) -> &HierarchicalBinLayout {
        &self.layout
    }

    pub fn perm_key(&self) -> PermKey {
        self.perm
    }

    pub fn blocks(&self) -> &[Vec<BinValue>] {
        &self.blocks
    }

    pub fn check_comparable(&self, other: &HophSketch) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::incompatible("hierarchical layouts differ"));
        }
        if self.perm != other.perm {
            return Err(Error::incompatible("permutation seeds differ"));
        }
        Ok(())
    }
}

/// Builds the hierarchical sketch: per group, per bin, the smallest
/// permuted element's within-bin offset or the empty marker.
pub fn sketch(
    s: &FeatureSet,
    p: &Permutation,
    layout: &HierarchicalBinLayout,
) -> Result<HophSketch> {
    if s.vocab_size() != layout.vocab_size() || p.size() != layout.vocab_size() {
        return Err(Error::invalid(format!(
            "vocabulary mismatch: set {}, permutation {}, layout {}",
            s.vocab_size(),
            p.size(),
            layout.vocab_size()
        )));
    }
    let permuted = p.apply_set(s)?;
    let ids = permuted.ids();
    let kp = layout.bins_per_group();
    let mut blocks = Vec::with_capacity(layout.group_count());
    let mut i = 0;
    for g in 0..layout.group_count() {
        let mut block = vec![BinValue::Empty; kp];
        for (bin, value) in block.iter_mut().enumerate() {
            let start = layout.bin_start(g, bin);
            let end = layout.bin_start(g, bin + 1);
            while i < ids.len() && ids[i] < end {
                if value.is_empty() {
                    *value = BinValue::Offset(ids[i] - start);
                }
                i += 1;
            }
        }
        blocks.push(block);
    }
    HophSketch::from_parts(layout.clone(), p.key(), blocks)
}

/// Per-group matched/excluded counts for one block pair.
fn block_stats(a: &[BinValue], b: &[BinValue], mode: EmptyBinMode) -> (usize, usize) {
    let mut matched = 0;
    let mut excluded = 0;
    for (va, vb) in a.iter().zip(b) {
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
    (matched, excluded)
}

/// Weighted similarity estimate: `sum_j w_j * R_j` with `R_j` the
/// empty-corrected OPH estimate of group `j`. Groups whose every bin is
/// excluded are dropped and the remaining weights renormalized.
pub fn estimate<F: Real>(a: &HophSketch, b: &HophSketch, mode: EmptyBinMode) -> Result<F> {
    a.check_comparable(b)?;
    let kp = a.layout.bins_per_group();
    let weights: Vec<F> = a.layout.group_weights();
    let mut acc = F::zero();
    let mut live_weight = F::zero();
    for ((ba, bb), &w) in a.blocks.iter().zip(&b.blocks).zip(&weights) {
        let (matched, excluded) = block_stats(ba, bb, mode);
        let usable = kp - excluded;
        if usable == 0 {
            continue;
        }
        acc = acc + w * F::from_count(matched) / F::from_count(usable);
        live_weight = live_weight + w;
    }
    if live_weight == F::zero() {
        return Err(Error::UndefinedEstimate(
            "every group fully excluded; both sets are effectively empty".into(),
        ));
    }
    Ok(acc / live_weight)
}

/// Aggregate matched-bin count of the `a:b` analysis:
/// `(sum_{j=1}^{l-1} r^(2j) N_j + r^(2l-1) N_l) * (l+1)`.
///
/// `counts` follows the analysis' convention: `l` entries, the last being
/// the summed count of the final two layout groups (see
/// [`collapse_last_two`]).
pub fn aggregate_matched<F: Real>(counts: &[usize], ratio: F) -> Result<F> {
    folded_weighted_sum(counts, ratio)
}

/// Aggregate empty-bin count; same form as [`aggregate_matched`] with
/// empty-bin inputs.
pub fn aggregate_empty<F: Real>(counts: &[usize], ratio: F) -> Result<F> {
    folded_weighted_sum(counts, ratio)
}

fn folded_weighted_sum<F: Real>(counts: &[usize], ratio: F) -> Result<F> {
    if counts.is_empty() {
        return Err(Error::invalid("need at least one group count"));
    }
    if !(ratio > F::zero() && ratio < F::one()) {
        return Err(Error::invalid("ratio must lie in (0, 1)"));
    }
    let l = counts.len();
    let mut sum = F::zero();
    for (j, &c) in counts.iter().enumerate().take(l - 1) {
        // j is 0-based; the analysis indexes groups from 1.
        sum = sum + ratio.powi(2 * (j as i32 + 1)) * F::from_count(c);
    }
    sum = sum + ratio.powi(2 * l as i32 - 1) * F::from_count(counts[l - 1]);
    Ok(sum * F::from_count(l + 1))
}

/// Folds the last two per-group counts together, producing the `l`-entry
/// form the aggregate formulas expect from an `l+1`-group layout.
pub fn collapse_last_two(per_group: &[usize]) -> Result<Vec<usize>> {
    if per_group.len() < 2 {
        return Err(Error::invalid("need at least two group counts to collapse"));
    }
    let mut out = per_group[..per_group.len() - 1].to_vec();
    *out.last_mut().unwrap() += per_group[per_group.len() - 1];
    Ok(out)
}

/// The analysis' combined estimator
/// `sum_{j=1}^{l-1} r^j N_j/(k_j - E_j) + r^(l-1) N_l/(k_l - E_l)`,
/// with the final two layout groups folded into the `l`-th term. Kept
/// separate from [`estimate`], whose convention the worked examples follow.
pub fn folded_estimate<F: Real>(a: &HophSketch, b: &HophSketch, mode: EmptyBinMode) -> Result<F> {
    a.check_comparable(b)?;
    let groups = a.layout.group_count();
    if groups < 2 {
        return Err(Error::invalid("combined estimator needs at least two groups"));
    }
    let kp = a.layout.bins_per_group();
    let (ra, rb) = a.layout.ratio();
    let ratio = F::from_u32(ra).unwrap() / F::from_u32(ra + rb).unwrap();
    let l = groups - 1;

    let stats: Vec<(usize, usize)> = a
        .blocks
        .iter()
        .zip(&b.blocks)
        .map(|(x, y)| block_stats(x, y, mode))
        .collect();

    let mut acc = F::zero();
    for (j, &(matched, excluded)) in stats.iter().enumerate().take(l - 1) {
        let usable = kp - excluded;
        if usable == 0 {
            continue;
        }
        acc = acc + ratio.powi(j as i32 + 1) * F::from_count(matched) / F::from_count(usable);
    }
    let matched = stats[l - 1].0 + stats[l].0;
    let excluded = stats[l - 1].1 + stats[l].1;
    let usable = 2 * kp - excluded;
    if usable > 0 {
        acc = acc + ratio.powi(l as i32 - 1) * F::from_count(matched) / F::from_count(usable);
    }
    Ok(acc)
}

/// Progressive comparison over the hierarchical groups.
///
/// Tracks the same quantity the final estimator reports: the weighted
/// empty-corrected match mass `A_l = sum_{j<=l, usable} w_j * M_j/(k'-E_j)`
/// with `U_l` the usable weight so far. After group `l`, the average match
/// rate the remaining groups (weight `W`) must deliver for the completed
/// estimate to reach `T` is `need = (T*(U_l + W) - A_l) / W`. Then:
/// - `need <= 0`: accept (threshold mass already banked);
/// - `need > 1`: reject (infeasible even if everything else matches);
/// - `need < T`: accept early if `P(X <= floor(need*k')) <= epsilon`;
/// - `need >= T`: reject early if `P(X >= ceil(need*k')) <= epsilon`;
///
/// with `X ~ Binomial(k', T)`. The two certainty guards are exact: they
/// can only fire when the full comparison is bound to agree. Correcting
/// the running mass keeps the filter aligned with the final estimator in
/// the late groups, whose geometrically small ranges always carry empty
/// bins; filtering on raw counts there mislabels near-threshold pairs.
/// When nothing is excluded this reduces to `(T - sum w_j M_j/k') / W`,
/// which is the plain mass balance.
pub fn compare<F: Real>(
    a: &HophSketch,
    b: &HophSketch,
    params: &FilterParams<F>,
    mode: EmptyBinMode,
) -> Result<(ComparisonVerdict<F>, FilterTrace<F>)> {
    params.validate()?;
    let tails = if params.threshold < F::one() {
        Some(TailTable::new(&BinomialModel::new(params.bins_per_group, params.threshold)?))
    } else {
        None
    };
    compare_with_tails(a, b, params, mode, tails.as_ref())
}

/// [`compare`] with a caller-supplied tail table (built once per corpus
/// run). Pass `None` only for `T = 1`.
pub fn compare_with_tails<F: Real>(
    a: &HophSketch,
    b: &HophSketch,
    params: &FilterParams<F>,
    mode: EmptyBinMode,
    tails: Option<&TailTable<F>>,
) -> Result<(ComparisonVerdict<F>, FilterTrace<F>)> {
    params.validate()?;
    a.check_comparable(b)?;
    let kp = a.layout.bins_per_group();
    if params.bins_per_group != kp {
        return Err(Error::invalid(format!(
            "params expect {} bins per group, layout has {kp}",
            params.bins_per_group
        )));
    }
    if let Some(t) = tails {
        if t.trials() != kp {
            return Err(Error::invalid("tail table built for a different group size"));
        }
    }
    let groups = a.layout.group_count();
    let threshold = params.threshold;
    let kp_f = F::from_count(kp);
    let (ra, rb) = a.layout.ratio();
    let ratio = F::from_u32(ra).unwrap() / F::from_u32(ra + rb).unwrap();
    let back = F::one() - ratio;

    let mut trace = FilterTrace::default();
    let mut achieved = F::zero();
    let mut usable_weight = F::zero();
    let mut m_cum = 0usize;
    // Weights telescope: group l carries r*(1-r)^(l-1), the final group
    // (1-r)^(groups-1), and the mass after group l is exactly (1-r)^l.
    let mut tail_mass = F::one();

    for l in 1..=groups {
        let w_l = if l < groups { ratio * tail_mass } else { tail_mass };
        tail_mass = tail_mass * back;

        let (m_l, excl_l) = block_stats(&a.blocks[l - 1], &b.blocks[l - 1], mode);
        m_cum += m_l;
        if excl_l < kp {
            achieved = achieved + w_l * F::from_count(m_l) / F::from_count(kp - excl_l);
            usable_weight = usable_weight + w_l;
        }
        if l == groups {
            break;
        }
        let remaining = tail_mass;
        let need = (threshold * (usable_weight + remaining) - achieved) / remaining;

        let mut record = GroupRecord {
            group: l,
            cumulative_matches: m_cum,
            required: Some(need),
            tail: None,
            action: FilterAction::Continue,
        };

        if need <= F::zero() {
            record.action = FilterAction::AcceptEarly;
            trace.records.push(record);
            return Ok((early(Decision::Similar, l), trace));
        }
        if need > F::one() {
            record.action = FilterAction::RejectEarly;
            trace.records.push(record);
            return Ok((early(Decision::NotSimilar, l), trace));
        }
        if let Some(tails) = tails {
            let scaled = need * kp_f;
            if need < threshold {
                let tail = tails.lower_tail(scaled.floor().to_i64().unwrap())?;
                record.tail = Some(tail);
                if tail <= params.epsilon {
                    record.action = FilterAction::AcceptEarly;
                    trace.records.push(record);
                    return Ok((early(Decision::Similar, l), trace));
                }
            } else {
                let tail = tails.upper_tail(scaled.ceil().to_i64().unwrap())?;
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

    let est: F = estimate(a, b, mode)?;
    trace.records.push(GroupRecord {
        group: groups,
        cumulative_matches: m_cum,
        required: None,
        tail: None,
        action: FilterAction::FinalVerdict,
    });
    let decision = if est >= threshold { Decision::Similar } else { Decision::NotSimilar };
    Ok((
        ComparisonVerdict {
            decision,
            groups_compared: groups,
            terminated_early: false,
            estimate: Some(est),
        },
        trace,
    ))
}

fn early<F>(decision: Decision, groups_compared: usize) -> ComparisonVerdict<F> {
    ComparisonVerdict { decision, groups_compared, terminated_early: true, estimate: None }
}
