//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `--nocapture` to see them).

mod common;

use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use rayon::prelude::*;

use permsketch::binomial::{lower_tail, upper_tail, BinomialModel, TailTable};
use permsketch::corpus::{exact_jaccard, gen_doc, gen_pair, gen_pair_counts, intersection_for_jaccard, Corpus};
use permsketch::detect::{detect, MethodConfig};
use permsketch::goph::{self, GroupedSketchView};
use permsketch::hoph::{self, HophSketch};
use permsketch::oph::{self, EmptyBinMode};
use permsketch::sketch::BinValue;
use permsketch::verdict::{Decision, FilterAction, FilterParams};
use permsketch::{mix_seed, FeatureSet, FlatBinLayout, HierarchicalBinLayout, PermKey, Permutation};

const THRESHOLD: f64 = 0.7;
const EPSILON: f64 = 1e-4;
const KPRIME: usize = 100;
const GROUPS: usize = 10;
const VOCAB: u32 = 1 << 16;
const WORKLOAD_PAIRS: usize = 10_000;
const WORKLOAD_SET_SIZE: usize = 10_000;

fn rel_close(got: f64, expected: f64, tol: f64) -> bool {
    (got / expected - 1.0).abs() < tol
}

/// Serializes the tests that either measure wall-clock time or saturate
/// every core; running them concurrently corrupts the timing assertions.
static HEAVY: Mutex<()> = Mutex::new(());

fn heavy_guard() -> MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

/// Uniform draw in [0, 1) derived from the seed mixer.
fn unit(seed: u64, salt: u64) -> f64 {
    mix_seed(seed, salt) as f64 / u64::MAX as f64
}

fn fixture_sets() -> (FeatureSet, FeatureSet, FeatureSet) {
    (
        FeatureSet::new(vec![1, 2, 5, 10, 12, 15], 17).unwrap(),
        FeatureSet::new(vec![1, 2, 6, 10, 12, 14], 17).unwrap(),
        FeatureSet::new(vec![2, 9, 10, 12, 14], 17).unwrap(),
    )
}

#[test]
fn criterion_1_golden_oph_example() {
    let _serialize = heavy_guard();
    let run = || {
        let (d1, d2, d3) = fixture_sets();
        let p = Permutation::identity(17).unwrap();
        let layout = FlatBinLayout::new(17, 4).unwrap();
        let s1 = oph::sketch(&d1, &p, &layout).unwrap();
        let s2 = oph::sketch(&d2, &p, &layout).unwrap();
        let s3 = oph::sketch(&d3, &p, &layout).unwrap();
        let e12: f64 = oph::compare(&s1, &s2, EmptyBinMode::EitherEmpty).unwrap();
        let e13: f64 = oph::compare(&s1, &s3, EmptyBinMode::EitherEmpty).unwrap();
        let j12: f64 = exact_jaccard(&d1, &d2).unwrap();
        let j13: f64 = exact_jaccard(&d1, &d3).unwrap();
        (s1, s2, s3, e12, e13, j12, j13)
    };
    run(); // warm up

    let started = Instant::now();
    let (s1, s2, s3, e12, e13, j12, j13) = run();
    let elapsed = started.elapsed();

    use BinValue::{Empty, Offset};
    assert_eq!(s1.values(), &[Offset(1), Offset(1), Offset(2), Offset(0)]);
    assert_eq!(s2.values(), &[Offset(1), Offset(2), Offset(2), Offset(0)]);
    assert_eq!(s3.values(), &[Offset(2), Empty, Offset(1), Offset(0)]);
    assert_eq!(e12, 0.75);
    assert_eq!(e13, 1.0 / 3.0);
    assert_eq!(j12, 0.5);
    assert_eq!(j13, 0.375);
    assert!(elapsed.as_secs_f64() < 1e-3, "golden example took {elapsed:?}");
    println!("criterion 1 (golden flat example): PASS");
}

#[test]
fn criterion_2_golden_hoph_example() {
    use BinValue::{Empty, Offset};
    let (d1, d2, d3) = fixture_sets();
    let layout = HierarchicalBinLayout::new(17, 1, 1, 2).unwrap();
    let starts: Vec<(u32, u32)> = layout.groups().iter().map(|g| (g.start, g.start + g.len)).collect();
    assert_eq!(starts, vec![(0, 8), (8, 12), (12, 17)]);

    let p = Permutation::identity(17).unwrap();
    let s1 = hoph::sketch(&d1, &p, &layout).unwrap();
    let s2 = hoph::sketch(&d2, &p, &layout).unwrap();
    let s3 = hoph::sketch(&d3, &p, &layout).unwrap();
    assert_eq!(
        s1.blocks(),
        &[vec![Offset(1), Offset(1)], vec![Empty, Offset(0)], vec![Offset(0), Offset(1)]]
    );
    assert_eq!(
        s2.blocks(),
        &[vec![Offset(1), Offset(2)], vec![Empty, Offset(0)], vec![Offset(0), Offset(0)]]
    );
    assert_eq!(
        s3.blocks(),
        &[vec![Offset(2), Empty], vec![Offset(1), Offset(0)], vec![Offset(0), Offset(0)]]
    );

    let e12: f64 = hoph::estimate(&s1, &s2, EmptyBinMode::EitherEmpty).unwrap();
    let e13: f64 = hoph::estimate(&s1, &s3, EmptyBinMode::EitherEmpty).unwrap();
    assert_eq!(e12, 0.625);
    assert_eq!(e13, 0.375);
    println!("criterion 2 (golden hierarchical example): PASS");
}

/// All rows of the match-probability table for K = 100, T = 0.6: the
/// columns are `F(x < X)` and `F(x >= X)`.
const TABLE2: [(i64, f64, f64); 20] = [
    (5, 3.27948e-33, 1.0),
    (10, 1.25639e-26, 1.0),
    (15, 2.31928e-21, 1.0),
    (20, 5.56419e-17, 1.0),
    (25, 2.71442e-13, 1.0),
    (30, 3.46422e-10, 1.0),
    (35, 1.35466e-7, 0.999999865),
    (40, 1.80415e-5, 0.999981959),
    (45, 0.000881808, 0.999118192),
    (50, 0.016761687, 0.983238313),
    (55, 0.131090453, 0.868909547),
    (60, 0.456705514, 0.543294486),
    (65, 0.820530647, 0.179469353),
    (70, 0.975217177, 0.024782823),
    (75, 0.998810999, 0.001189001),
    (80, 0.999983588, 1.64119e-5),
    (85, 0.999999949, 5.0732e-8),
    (90, 1.0, 2.33876e-11),
    (95, 1.0, 7.01609e-16),
    (100, 1.0, 6.53319e-23),
];

#[test]
fn criterion_3_table_reproduction() {
    let model = BinomialModel::new(100, 0.6).unwrap();
    let table = TailTable::new(&model);
    // Independent oracle: exact rational summation at T = 3/5.
    let (oracle_lower, oracle_upper) = common::exact_binomial_tails(100, 3, 5);

    for &(x, f_lt, f_ge) in &TABLE2 {
        let lower = lower_tail(x - 1, &model).unwrap();
        let upper = upper_tail(x, &model).unwrap();
        assert!(rel_close(lower, f_lt, 1e-3), "F(x<{x}): {lower} vs {f_lt}");
        assert!(rel_close(upper, f_ge, 1e-3), "F(x>={x}): {upper} vs {f_ge}");
        assert!(rel_close(table.lower_tail(x - 1).unwrap(), f_lt, 1e-3));
        assert!(rel_close(table.upper_tail(x).unwrap(), f_ge, 1e-3));
        // Both code paths against the rational oracle.
        assert!((lower - oracle_lower[(x - 1) as usize]).abs() < 1e-12);
        assert!((upper - oracle_upper[x as usize]).abs() < 1e-12);
    }
    println!("criterion 3 (probability table, 20 rows x 2 tails): PASS");
}

/// Sketch pair with prescribed per-group match counts over a flat layout.
fn flat_pair_with_matches(per_group: &[usize], kp: usize, vocab: u32) -> (permsketch::Sketch, permsketch::Sketch) {
    let layout = FlatBinLayout::new(vocab, per_group.len() * kp).unwrap();
    let key = PermKey { seed: 42, size: vocab, identity: false };
    let mut va = Vec::new();
    let mut vb = Vec::new();
    for &m in per_group {
        for i in 0..kp {
            va.push(BinValue::Offset(0));
            vb.push(BinValue::Offset(if i < m { 0 } else { 1 }));
        }
    }
    (
        permsketch::Sketch::from_parts(layout, key, va).unwrap(),
        permsketch::Sketch::from_parts(layout, key, vb).unwrap(),
    )
}

/// Hierarchical sketch pair with prescribed per-group match counts.
fn hier_pair_with_matches(
    layout: &HierarchicalBinLayout,
    per_group: &[usize],
) -> (HophSketch, HophSketch) {
    assert_eq!(per_group.len(), layout.group_count());
    let key = PermKey { seed: 42, size: layout.vocab_size(), identity: false };
    let kp = layout.bins_per_group();
    let mut ba = Vec::new();
    let mut bb = Vec::new();
    for &m in per_group {
        ba.push(vec![BinValue::Offset(0); kp]);
        bb.push((0..kp).map(|i| BinValue::Offset(if i < m { 0 } else { 1 })).collect());
    }
    (
        HophSketch::from_parts(layout.clone(), key, ba).unwrap(),
        HophSketch::from_parts(layout.clone(), key, bb).unwrap(),
    )
}

#[test]
fn criterion_4_worked_filter_traces() {
    // Grouped filter walk: 65, 5, 10, 10 matches, then rejection.
    let mut groups = vec![65, 5, 10, 10];
    groups.resize(10, 0);
    let (sa, sb) = flat_pair_with_matches(&groups, 100, 10_000);
    let va = GroupedSketchView::new(&sa, 10, 100).unwrap();
    let vb = GroupedSketchView::new(&sb, 10, 100).unwrap();
    let params = FilterParams::new(0.6, 1e-4, 100, 10).unwrap();
    let (verdict, trace) = goph::compare(&va, &vb, &params, EmptyBinMode::EitherEmpty).unwrap();

    assert_eq!(verdict.decision, Decision::NotSimilar);
    assert!(verdict.terminated_early);
    assert_eq!(verdict.groups_compared, 4);
    let required: Vec<f64> = trace.records.iter().map(|r| r.required.unwrap()).collect();
    for (got, want) in required.iter().zip([59.44, 66.25, 74.28, 85.00]) {
        assert!((got - want).abs() <= 0.01, "required avg {got} vs {want}");
    }
    assert_eq!(trace.records.len(), 4);
    assert_eq!(trace.records[3].action, FilterAction::RejectEarly);
    assert!(rel_close(trace.records[3].tail.unwrap(), 5.0732e-8, 1e-3));

    // Hierarchical filter: 40 matches in the first (half-weight) group.
    let layout = HierarchicalBinLayout::new(102_400, 1, 1, 100).unwrap();
    assert_eq!(layout.group_count(), 10);
    let mut per_group = vec![40];
    per_group.resize(10, 0);
    let (ha, hb) = hier_pair_with_matches(&layout, &per_group);
    let (hv, ht) = hoph::compare(&ha, &hb, &params, EmptyBinMode::EitherEmpty).unwrap();

    assert_eq!(hv.decision, Decision::NotSimilar);
    assert!(hv.terminated_early);
    assert_eq!(hv.groups_compared, 1);
    assert_eq!(ht.records.len(), 1);
    let rate = ht.records[0].required.unwrap();
    assert!((rate - 0.8).abs() < 1e-9, "required rate {rate}");
    assert!(rel_close(ht.records[0].tail.unwrap(), 1.64119e-5, 1e-3));
    println!("criterion 4 (worked filter traces): PASS");
}

#[test]
fn criterion_5_unbiasedness() {
    let _serialize = heavy_guard();
    let started = Instant::now();
    let vocab = 1u32 << 14;
    let trials = 10_000usize;
    let flat = FlatBinLayout::new(vocab, 256).unwrap();
    let hier = HierarchicalBinLayout::new(vocab, 1, 1, 64).unwrap();

    // (size, intersection) giving unions of 4096 at J ~ 0.25, 0.5, 0.8.
    for (case, &(size, inter)) in [(2560usize, 1024usize), (3072, 2048), (3686, 3276)]
        .iter()
        .enumerate()
    {
        let (a, b) = gen_pair_counts(size, inter, vocab, 4200 + case as u64).unwrap();
        let (i, u) = a.overlap_counts(&b);
        assert_eq!((i, u), (inter, 4096));
        let j: f64 = exact_jaccard(&a, &b).unwrap();

        let samples: Vec<(f64, f64)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let p =
                    Permutation::generate(mix_seed(5000 + case as u64, t as u64), vocab).unwrap();
                let sa = oph::sketch(&a, &p, &flat).unwrap();
                let sb = oph::sketch(&b, &p, &flat).unwrap();
                let flat_est: f64 = oph::compare(&sa, &sb, EmptyBinMode::JointEmpty).unwrap();
                let ha = hoph::sketch(&a, &p, &hier).unwrap();
                let hb = hoph::sketch(&b, &p, &hier).unwrap();
                let hoph_est: f64 = hoph::estimate(&ha, &hb, EmptyBinMode::JointEmpty).unwrap();
                (flat_est, hoph_est)
            })
            .collect();

        let flat_samples: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let hoph_samples: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let (m1, se1) = common::mean_and_se(&flat_samples);
        let (m2, se2) = common::mean_and_se(&hoph_samples);
        assert!((m1 - j).abs() <= 3.0 * se1, "flat mean {m1} vs {j} (se {se1})");
        assert!((m2 - j).abs() <= 3.0 * se2, "hierarchical mean {m2} vs {j} (se {se2})");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "unbiasedness run took {elapsed:?}");
    println!("criterion 5 (estimator unbiasedness, {:.1}s): PASS", elapsed.as_secs_f64());
}

struct PairOutcome {
    jaccard: f64,
    oph_similar: bool,
    goph_similar: bool,
    goph_groups: usize,
    hoph_similar: bool,
    hoph_groups: usize,
    hoph_full_similar: bool,
}

static WORKLOAD: OnceLock<Vec<PairOutcome>> = OnceLock::new();

/// 10^4 synthetic pairs with J ~ U[0,1]; every method's verdict per pair.
fn workload() -> &'static [PairOutcome] {
    WORKLOAD.get_or_init(|| {
        let flat = FlatBinLayout::new(VOCAB, KPRIME * GROUPS).unwrap();
        let hier = HierarchicalBinLayout::new(VOCAB, 1, 1, KPRIME).unwrap();
        let params = FilterParams::new(THRESHOLD, EPSILON, KPRIME, GROUPS).unwrap();
        let tails = TailTable::new(&BinomialModel::new(KPRIME, THRESHOLD).unwrap());
        (0..WORKLOAD_PAIRS)
            .into_par_iter()
            .map(|t| {
                let t = t as u64;
                let j = unit(0xACCE55, t);
                let i = intersection_for_jaccard(WORKLOAD_SET_SIZE, j);
                let (a, b) =
                    gen_pair_counts(WORKLOAD_SET_SIZE, i, VOCAB, mix_seed(601, t)).unwrap();
                let jaccard = i as f64 / (2 * WORKLOAD_SET_SIZE - i) as f64;
                let perm = Permutation::generate(mix_seed(602, t), VOCAB).unwrap();

                let sa = oph::sketch(&a, &perm, &flat).unwrap();
                let sb = oph::sketch(&b, &perm, &flat).unwrap();
                let oph_est: f64 = oph::compare(&sa, &sb, EmptyBinMode::EitherEmpty).unwrap();

                let va = GroupedSketchView::new(&sa, GROUPS, KPRIME).unwrap();
                let vb = GroupedSketchView::new(&sb, GROUPS, KPRIME).unwrap();
                let (gv, _) =
                    goph::compare_with_tails(&va, &vb, &params, EmptyBinMode::EitherEmpty, Some(&tails))
                        .unwrap();

                let ha = hoph::sketch(&a, &perm, &hier).unwrap();
                let hb = hoph::sketch(&b, &perm, &hier).unwrap();
                let (hv, _) =
                    hoph::compare_with_tails(&ha, &hb, &params, EmptyBinMode::EitherEmpty, Some(&tails))
                        .unwrap();
                let hoph_full: f64 = hoph::estimate(&ha, &hb, EmptyBinMode::EitherEmpty).unwrap();

                PairOutcome {
                    jaccard,
                    oph_similar: oph_est >= THRESHOLD,
                    goph_similar: gv.decision == Decision::Similar,
                    goph_groups: gv.groups_compared,
                    hoph_similar: hv.decision == Decision::Similar,
                    hoph_groups: hv.groups_compared,
                    hoph_full_similar: hoph_full >= THRESHOLD,
                }
            })
            .collect()
    })
}

#[test]
fn criterion_6_filter_soundness() {
    let pairs = workload();
    let total = pairs.len() as f64;

    let goph_agree = pairs.iter().filter(|p| p.goph_similar == p.oph_similar).count();
    let hoph_agree_own = pairs.iter().filter(|p| p.hoph_similar == p.hoph_full_similar).count();
    let hoph_agree_flat = pairs.iter().filter(|p| p.hoph_similar == p.oph_similar).count();

    let outside: Vec<&PairOutcome> =
        pairs.iter().filter(|p| (p.jaccard - THRESHOLD).abs() > 0.1).collect();
    let goph_outside = outside.iter().filter(|p| p.goph_similar == p.oph_similar).count();
    let hoph_outside = outside.iter().filter(|p| p.hoph_similar == p.hoph_full_similar).count();

    println!(
        "agreement: goph/full-oph {:.4}, hoph/full-hoph {:.4}, hoph/full-oph {:.4}",
        goph_agree as f64 / total,
        hoph_agree_own as f64 / total,
        hoph_agree_flat as f64 / total,
    );

    assert!(goph_agree as f64 / total >= 0.99, "goph agreement {}", goph_agree as f64 / total);
    assert!(
        hoph_agree_own as f64 / total >= 0.99,
        "hoph agreement {}",
        hoph_agree_own as f64 / total
    );
    assert_eq!(goph_outside, outside.len(), "goph must agree on every clear pair");
    assert_eq!(hoph_outside, outside.len(), "hoph must agree on every clear pair");
    println!("criterion 6 (filter soundness on {WORKLOAD_PAIRS} pairs): PASS");
}

#[test]
fn criterion_7_speed_properties() {
    // Bin-count gaps on dissimilar pairs (J <= 0.5), from the shared workload.
    let pairs = workload();
    let dissimilar: Vec<&PairOutcome> = pairs.iter().filter(|p| p.jaccard <= 0.5).collect();
    assert!(dissimilar.len() > 1000, "workload must contain dissimilar pairs");
    let full_bins = (KPRIME * GROUPS) as f64;
    let goph_bins = dissimilar.iter().map(|p| (p.goph_groups * KPRIME) as f64).sum::<f64>()
        / dissimilar.len() as f64;
    let hoph_bins = dissimilar.iter().map(|p| (p.hoph_groups * KPRIME) as f64).sum::<f64>()
        / dissimilar.len() as f64;
    println!("mean bins on J<=0.5: hoph {hoph_bins:.1}, goph {goph_bins:.1}, full {full_bins}");
    assert!(goph_bins <= 0.8 * full_bins, "goph bins {goph_bins} vs full {full_bins}");
    assert!(hoph_bins <= 0.8 * goph_bins, "hoph bins {hoph_bins} vs goph {goph_bins}");

    // Mean groups on dissimilar pairs stays under half the groups.
    let goph_groups = goph_bins / KPRIME as f64;
    assert!(goph_groups < GROUPS as f64 / 2.0);

    // Wall-clock ordering over three repetitions (min per method), on a
    // corpus slice: sketch construction included, minhash materializes
    // n*k' permutations. Serialized against the other heavy tests so the
    // measurements see an idle machine.
    let _serialize = heavy_guard();
    let mut corpus = Corpus::new(VOCAB);
    for t in 0..60u64 {
        let j = t as f64 / 59.0;
        let (a, b) = gen_pair(3000, j, VOCAB, mix_seed(701, t)).unwrap();
        corpus.push(format!("t{t:02}a"), a).unwrap();
        corpus.push(format!("t{t:02}b"), b).unwrap();
    }
    let queries: Vec<String> = corpus.docs().iter().map(|(id, _)| id.clone()).collect();
    let params = FilterParams::new(THRESHOLD, EPSILON, KPRIME, GROUPS).unwrap();
    let methods = [
        MethodConfig::Hoph { bins_per_group: KPRIME, ratio_a: 1, ratio_b: 1 },
        MethodConfig::Goph { bins_per_group: KPRIME, groups: GROUPS },
        MethodConfig::Oph { bins: KPRIME * GROUPS },
        MethodConfig::MinHash { k: KPRIME * GROUPS },
    ];
    let mut wall = [f64::INFINITY; 4];
    for _rep in 0..3 {
        for (i, m) in methods.iter().enumerate() {
            let r = detect(&corpus, &queries, m, &params, EmptyBinMode::EitherEmpty, 99, false)
                .unwrap();
            wall[i] = wall[i].min(r.wall_ms);
        }
    }
    println!(
        "wall-clock ms (min of 3): hoph {:.1}, goph {:.1}, oph {:.1}, minhash {:.1}",
        wall[0], wall[1], wall[2], wall[3]
    );
    assert!(wall[0] <= wall[1], "hoph {} vs goph {}", wall[0], wall[1]);
    assert!(wall[1] <= wall[2], "goph {} vs oph {}", wall[1], wall[2]);
    assert!(wall[2] <= wall[3], "oph {} vs minhash {}", wall[2], wall[3]);
    println!("criterion 7 (speed properties): PASS");
}

#[test]
fn criterion_8_degeneracy_oracle() {
    let _serialize = heavy_guard();
    let vocab = VOCAB;
    let size = 8000usize;
    // 1000 documents: 80 planted pairs well above threshold, the rest
    // independent (pairwise J ~ 0.065).
    let mut corpus = Corpus::new(vocab);
    let jaccards = [0.75, 0.8, 0.85, 0.9];
    for t in 0..80u64 {
        let j = jaccards[(t % 4) as usize];
        let (a, b) = gen_pair(size, j, vocab, mix_seed(801, t)).unwrap();
        corpus.push(format!("p{t:03}a"), a).unwrap();
        corpus.push(format!("p{t:03}b"), b).unwrap();
    }
    for t in 0..840u64 {
        corpus.push(format!("d{t:03}"), gen_doc(size, vocab, mix_seed(802, t)).unwrap()).unwrap();
    }
    assert_eq!(corpus.len(), 1000);
    let queries: Vec<String> = (0..20)
        .map(|t| format!("p{t:03}a"))
        .chain((0..20).map(|t| format!("d{t:03}")))
        .collect();

    let seed = 808u64;
    let tiny = FilterParams::new(THRESHOLD, 1e-300, KPRIME, GROUPS).unwrap();

    // Grouped filter with unreachable tails vs the plain full comparison.
    let goph_run = detect(
        &corpus,
        &queries,
        &MethodConfig::Goph { bins_per_group: KPRIME, groups: GROUPS },
        &tiny,
        EmptyBinMode::EitherEmpty,
        seed,
        false,
    )
    .unwrap();
    let oph_run = detect(
        &corpus,
        &queries,
        &MethodConfig::Oph { bins: KPRIME * GROUPS },
        &tiny,
        EmptyBinMode::EitherEmpty,
        seed,
        false,
    )
    .unwrap();
    assert_eq!(goph_run.retrieved_keys(), oph_run.retrieved_keys());

    // Hierarchical filter vs its own full-comparison verdicts.
    let hoph_run = detect(
        &corpus,
        &queries,
        &MethodConfig::Hoph { bins_per_group: KPRIME, ratio_a: 1, ratio_b: 1 },
        &tiny,
        EmptyBinMode::EitherEmpty,
        seed,
        false,
    )
    .unwrap();
    let layout = HierarchicalBinLayout::new(vocab, 1, 1, KPRIME).unwrap();
    let perm = Permutation::generate(seed, vocab).unwrap();
    let sketches: Vec<HophSketch> = corpus
        .docs()
        .par_iter()
        .map(|(_, set)| hoph::sketch(set, &perm, &layout).unwrap())
        .collect();
    let mut full_keys = std::collections::BTreeSet::new();
    for q in &queries {
        let qi = corpus.position(q).unwrap();
        for c in 0..corpus.len() {
            if c == qi {
                continue;
            }
            let est: f64 =
                hoph::estimate(&sketches[qi], &sketches[c], EmptyBinMode::EitherEmpty).unwrap();
            if est >= THRESHOLD {
                full_keys.insert((q.clone(), corpus.docs()[c].0.clone()));
            }
        }
    }
    assert_eq!(hoph_run.retrieved_keys(), full_keys);
    assert!(!oph_run.retrieved_keys().is_empty(), "planted pairs must be retrieved");
    println!("criterion 8 (degeneracy at epsilon = 1e-300): PASS");
}

#[test]
fn criterion_9_variance_formula() {
    let _serialize = heavy_guard();
    let started = Instant::now();
    let vocab = 1024u32;
    let bins = 64usize;
    let trials = 100_000usize;
    // |A| = |B| = 192, intersection 128: union 256, J = 0.5 exactly.
    let (a, b) = gen_pair_counts(192, 128, vocab, 901).unwrap();
    assert_eq!(exact_jaccard::<f64>(&a, &b).unwrap(), 0.5);

    let layout = FlatBinLayout::new(vocab, bins).unwrap();
    let estimates: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let p = Permutation::generate(mix_seed(902, t as u64), vocab).unwrap();
            let sa = oph::sketch(&a, &p, &layout).unwrap();
            let sb = oph::sketch(&b, &p, &layout).unwrap();
            oph::compare(&sa, &sb, EmptyBinMode::JointEmpty).unwrap()
        })
        .collect();
    let empirical = common::sample_variance(&estimates);

    let predicted: f64 = oph::variance_mc(0.5, 256, bins, trials, 903).unwrap();
    let rel = (predicted / empirical - 1.0).abs();
    println!("variance: empirical {empirical:.6e}, predicted {predicted:.6e}, rel {rel:.4}");
    assert!(rel < 0.05, "variance mismatch: {predicted} vs {empirical}");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "variance check took {elapsed:?}");
    println!("criterion 9 (variance formula, {:.1}s): PASS", elapsed.as_secs_f64());
}
