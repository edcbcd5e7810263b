//! Near-duplicate detection over a corpus: sketch every document once,
//! compare each query against every other document with the chosen method,
//! and score retrieved pairs against the exact-Jaccard ground truth.
//!
//! Pair comparisons run in parallel on the current rayon pool; results are
//! keyed and sorted afterwards, so reports are identical for any worker
//! count.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::{BinomialModel, TailTable};
use crate::corpus::{exact_jaccard, Corpus};
use crate::error::{Error, Result};
use crate::goph::GroupedSketchView;
use crate::layout::{FlatBinLayout, HierarchicalBinLayout};
use crate::minhash::MinHasher;
use crate::oph::EmptyBinMode;
use crate::perm::Permutation;
use crate::verdict::{ComparisonVerdict, Decision, FilterParams};
use crate::{goph, hoph, minhash, oph};

/// Which sketch/comparison pipeline `detect` runs, with its sizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodConfig {
    MinHash { k: usize },
    Oph { bins: usize },
    Goph { bins_per_group: usize, groups: usize },
    Hoph { bins_per_group: usize, ratio_a: u32, ratio_b: u32 },
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::MinHash { .. } => "minhash",
            MethodConfig::Oph { .. } => "oph",
            MethodConfig::Goph { .. } => "goph",
            MethodConfig::Hoph { .. } => "hoph",
        }
    }

    /// Bins examined by a full (never-terminating) comparison.
    pub fn total_bins(&self, corpus_vocab: u32) -> Result<usize> {
        Ok(match self {
            MethodConfig::MinHash { k } => *k,
            MethodConfig::Oph { bins } => *bins,
            MethodConfig::Goph { bins_per_group, groups } => bins_per_group * groups,
            MethodConfig::Hoph { bins_per_group, ratio_a, ratio_b } => {
                HierarchicalBinLayout::new(corpus_vocab, *ratio_a, *ratio_b, *bins_per_group)?
                    .total_bins()
            }
        })
    }
}

/// One retrieved (judged similar) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedPair {
    pub query: String,
    pub candidate: String,
    pub decision: Decision,
    pub estimate: Option<f64>,
    pub groups_compared: usize,
}

/// Outcome of one `detect` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub method: String,
    pub queries: Vec<String>,
    pub retrieved: Vec<RetrievedPair>,
    pub ground_truth: Vec<(String, String)>,
    pub precision: f64,
    pub recall: f64,
    pub wall_ms: f64,
    pub pairs_compared: usize,
    /// Mean groups walked per comparison; `None` for unfiltered methods.
    pub mean_groups_compared: Option<f64>,
    pub mean_bins_compared: f64,
}

impl DetectionReport {
    /// Deterministic key-sorted text: header lines, then one record per
    /// retrieved pair. Wall-clock is deliberately not included so reports
    /// byte-compare across runs and worker counts.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("#method={}\n", self.method));
        out.push_str(&format!("#queries={}\n", self.queries.len()));
        out.push_str(&format!("#retrieved={}\n", self.retrieved.len()));
        out.push_str(&format!("#ground_truth={}\n", self.ground_truth.len()));
        out.push_str(&format!("#precision={}\n", self.precision));
        out.push_str(&format!("#recall={}\n", self.recall));
        out.push_str("#query\tcandidate\tdecision\testimate\tgroups_compared\n");
        for p in &self.retrieved {
            let est = p.estimate.map(|e| e.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                p.query, p.candidate, p.decision, est, p.groups_compared
            ));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.render().as_bytes())?;
        Ok(())
    }

    /// Retrieved pairs as an order-free set of (query, candidate) keys.
    pub fn retrieved_keys(&self) -> BTreeSet<(String, String)> {
        self.retrieved
            .iter()
            .map(|p| (p.query.clone(), p.candidate.clone()))
            .collect()
    }
}

enum Sketches {
    MinHash(Vec<crate::sketch::MinHashSketch>),
    Flat(Vec<crate::sketch::Sketch>),
    Hier(Vec<hoph::HophSketch>),
}

/// Runs one method over the corpus.
///
/// Every query is compared against every other document; `retrieved` holds
/// the pairs judged similar. Ground truth is `exact_jaccard >= T`. All
/// randomness flows from `seed` (`identity` swaps in the identity
/// permutation for fixture reproduction).
pub fn detect(
    corpus: &Corpus,
    query_ids: &[String],
    method: &MethodConfig,
    params: &FilterParams<f64>,
    mode: EmptyBinMode,
    seed: u64,
    identity: bool,
) -> Result<DetectionReport> {
    params.validate()?;
    let vocab = corpus.vocab_size();
    let queries: Vec<usize> = query_ids
        .iter()
        .map(|id| {
            corpus
                .position(id)
                .ok_or_else(|| Error::invalid(format!("query id '{id}' not in corpus")))
        })
        .collect::<Result<Vec<_>>>()?;

    let started = Instant::now();

    let perm = if identity { Permutation::identity(vocab)? } else { Permutation::generate(seed, vocab)? };
    let sketches = match method {
        MethodConfig::MinHash { k } => {
            let hasher = MinHasher::from_master_seed(seed, *k, vocab)?;
            let sk = corpus
                .docs()
                .par_iter()
                .map(|(_, set)| hasher.sketch(set))
                .collect::<Result<Vec<_>>>()?;
            Sketches::MinHash(sk)
        }
        MethodConfig::Oph { bins } => {
            let layout = FlatBinLayout::new(vocab, *bins)?;
            let sk = corpus
                .docs()
                .par_iter()
                .map(|(_, set)| oph::sketch(set, &perm, &layout))
                .collect::<Result<Vec<_>>>()?;
            Sketches::Flat(sk)
        }
        MethodConfig::Goph { bins_per_group, groups } => {
            let layout = FlatBinLayout::new(vocab, bins_per_group * groups)?;
            let sk = corpus
                .docs()
                .par_iter()
                .map(|(_, set)| oph::sketch(set, &perm, &layout))
                .collect::<Result<Vec<_>>>()?;
            Sketches::Flat(sk)
        }
        MethodConfig::Hoph { bins_per_group, ratio_a, ratio_b } => {
            let layout = HierarchicalBinLayout::new(vocab, *ratio_a, *ratio_b, *bins_per_group)?;
            let sk = corpus
                .docs()
                .par_iter()
                .map(|(_, set)| hoph::sketch(set, &perm, &layout))
                .collect::<Result<Vec<_>>>()?;
            Sketches::Hier(sk)
        }
    };

    // All (query, candidate) index pairs, skipping self-comparisons.
    let tasks: Vec<(usize, usize)> = queries
        .iter()
        .flat_map(|&q| (0..corpus.len()).filter(move |&c| c != q).map(move |c| (q, c)))
        .collect();

    // One tail table serves every filtered comparison of the run; the
    // grouping always comes from the method config.
    let tails = match method {
        MethodConfig::Goph { bins_per_group, .. } | MethodConfig::Hoph { bins_per_group, .. }
            if params.threshold < 1.0 =>
        {
            Some(TailTable::new(&BinomialModel::new(*bins_per_group, params.threshold)?))
        }
        _ => None,
    };

    let verdicts: Vec<(usize, usize, ComparisonVerdict<f64>)> = tasks
        .par_iter()
        .map(|&(q, c)| -> Result<(usize, usize, ComparisonVerdict<f64>)> {
            let v = match (&sketches, method) {
                (Sketches::MinHash(sk), _) => {
                    let est: f64 = minhash::estimate(&sk[q], &sk[c])?;
                    full_verdict(est, params.threshold, 1)
                }
                (Sketches::Flat(sk), MethodConfig::Oph { .. }) => {
                    let est: f64 = oph::compare(&sk[q], &sk[c], mode)?;
                    full_verdict(est, params.threshold, 1)
                }
                (Sketches::Flat(sk), MethodConfig::Goph { bins_per_group, groups }) => {
                    let va = GroupedSketchView::new(&sk[q], *groups, *bins_per_group)?;
                    let vb = GroupedSketchView::new(&sk[c], *groups, *bins_per_group)?;
                    let gp = FilterParams { bins_per_group: *bins_per_group, groups: *groups, ..*params };
                    goph::compare_with_tails(&va, &vb, &gp, mode, tails.as_ref())?.0
                }
                (Sketches::Hier(sk), MethodConfig::Hoph { bins_per_group, .. }) => {
                    let hp = FilterParams { bins_per_group: *bins_per_group, ..*params };
                    hoph::compare_with_tails(&sk[q], &sk[c], &hp, mode, tails.as_ref())?.0
                }
                _ => unreachable!("sketch kind follows method"),
            };
            Ok((q, c, v))
        })
        .collect::<Result<Vec<_>>>()?;

    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    // Group statistics over every comparison, retrieved or not.
    let pairs_compared = verdicts.len();
    let filtered = matches!(method, MethodConfig::Goph { .. } | MethodConfig::Hoph { .. });
    let mean_groups = if filtered && pairs_compared > 0 {
        Some(verdicts.iter().map(|(_, _, v)| v.groups_compared as f64).sum::<f64>() / pairs_compared as f64)
    } else {
        None
    };
    let bins_per_unit: f64 = match method {
        MethodConfig::MinHash { k } => *k as f64,
        MethodConfig::Oph { bins } => *bins as f64,
        MethodConfig::Goph { bins_per_group, .. } | MethodConfig::Hoph { bins_per_group, .. } => {
            *bins_per_group as f64
        }
    };
    let mean_bins = if pairs_compared == 0 {
        0.0
    } else if filtered {
        verdicts.iter().map(|(_, _, v)| v.groups_compared as f64 * bins_per_unit).sum::<f64>()
            / pairs_compared as f64
    } else {
        bins_per_unit
    };

    let mut retrieved: Vec<RetrievedPair> = verdicts
        .iter()
        .filter(|(_, _, v)| v.decision == Decision::Similar)
        .map(|&(q, c, v)| RetrievedPair {
            query: corpus.docs()[q].0.clone(),
            candidate: corpus.docs()[c].0.clone(),
            decision: v.decision,
            estimate: v.estimate,
            groups_compared: v.groups_compared,
        })
        .collect();
    retrieved.sort_by(|a, b| (&a.query, &a.candidate).cmp(&(&b.query, &b.candidate)));

    // Exact-Jaccard ground truth over the same pair universe.
    let mut ground_truth: Vec<(String, String)> = tasks
        .par_iter()
        .filter_map(|&(q, c)| {
            let a = &corpus.docs()[q].1;
            let b = &corpus.docs()[c].1;
            match exact_jaccard::<f64>(a, b) {
                Ok(j) if j >= params.threshold => {
                    Some((corpus.docs()[q].0.clone(), corpus.docs()[c].0.clone()))
                }
                _ => None,
            }
        })
        .collect();
    ground_truth.sort();

    let keys: Vec<(String, String)> =
        retrieved.iter().map(|p| (p.query.clone(), p.candidate.clone())).collect();
    let (precision, recall) = precision_recall(&keys, &ground_truth);

    Ok(DetectionReport {
        method: method.name().to_string(),
        queries: query_ids.to_vec(),
        retrieved,
        ground_truth,
        precision,
        recall,
        wall_ms,
        pairs_compared,
        mean_groups_compared: mean_groups,
        mean_bins_compared: mean_bins,
    })
}

/// Precision = |retrieved ∩ truth| / |retrieved|,
/// recall = |retrieved ∩ truth| / |truth|.
/// An empty denominator counts as a perfect score (nothing wrongly
/// retrieved / nothing missed).
pub fn precision_recall(
    retrieved: &[(String, String)],
    ground_truth: &[(String, String)],
) -> (f64, f64) {
    let truth_set: BTreeSet<&(String, String)> = ground_truth.iter().collect();
    let hits = retrieved.iter().filter(|k| truth_set.contains(k)).count();
    let precision = if retrieved.is_empty() { 1.0 } else { hits as f64 / retrieved.len() as f64 };
    let recall =
        if ground_truth.is_empty() { 1.0 } else { hits as f64 / ground_truth.len() as f64 };
    (precision, recall)
}

fn full_verdict(est: f64, threshold: f64, groups: usize) -> ComparisonVerdict<f64> {
    ComparisonVerdict {
        decision: if est >= threshold { Decision::Similar } else { Decision::NotSimilar },
        groups_compared: groups,
        terminated_early: false,
        estimate: Some(est),
    }
}
