//! Command-line front-end: synthetic corpus generation, sketching,
//! pairwise comparison, near-duplicate detection, and the benchmark table.
//!
//! Exit codes: 0 success, 2 usage error, 1 data error.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use permsketch::corpus::{gen_corpus, Corpus};
use permsketch::detect::{detect, MethodConfig};
use permsketch::files::SketchFile;
use permsketch::goph::GroupedSketchView;
use permsketch::hoph;
use permsketch::minhash::{self, MinHasher};
use permsketch::oph;
use permsketch::verdict::FilterAction;
use permsketch::{
    EmptyBinMode, Error, FilterParams64, FilterTrace64, FlatBinLayout, HierarchicalBinLayout,
    Permutation,
};

#[derive(Parser)]
#[command(name = "permsketch", version, about = "Near-duplicate detection over integer feature sets")]
struct Cli {
    /// Worker threads for corpus-level commands (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct MethodArgs {
    /// Method: minhash | oph | goph | hoph.
    #[arg(long)]
    method: String,

    /// Total sketch length for minhash/oph (default: kprime * groups).
    #[arg(long)]
    k: Option<usize>,

    /// Bins per group (k') for goph/hoph.
    #[arg(long, default_value_t = 100)]
    kprime: usize,

    /// Group count (n) for goph.
    #[arg(long, default_value_t = 10)]
    groups: usize,

    /// Hierarchical split ratio for hoph, as A:B.
    #[arg(long, default_value = "1:1")]
    ratio: String,
}

impl MethodArgs {
    fn config(&self) -> Result<MethodConfig, Error> {
        let k = self.k.unwrap_or(self.kprime * self.groups);
        match self.method.as_str() {
            "minhash" => Ok(MethodConfig::MinHash { k }),
            "oph" => Ok(MethodConfig::Oph { bins: k }),
            "goph" => Ok(MethodConfig::Goph { bins_per_group: self.kprime, groups: self.groups }),
            "hoph" => {
                let (a, b) = parse_ratio(&self.ratio)?;
                Ok(MethodConfig::Hoph { bins_per_group: self.kprime, ratio_a: a, ratio_b: b })
            }
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted similar pairs.
    Gen {
        /// Total number of documents.
        #[arg(long)]
        docs: usize,
        /// Feature IDs per document.
        #[arg(long)]
        size: usize,
        /// Number of planted similar pairs (uses 2*pairs documents).
        #[arg(long, default_value_t = 0)]
        pairs: usize,
        /// Target Jaccard of the planted pairs.
        #[arg(long, default_value_t = 0.8)]
        jaccard: f64,
        /// Vocabulary size |V|.
        #[arg(long)]
        vocab: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },

    /// Sketch every document of a feature-set file.
    Sketch {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the identity permutation (fixture reproduction).
        #[arg(long)]
        identity_perm: bool,
        #[arg(long)]
        out: PathBuf,
    },

    /// Compare two documents; prints the estimate or the verdict + trace.
    Compare {
        /// Previously written sketch file.
        #[arg(long, conflicts_with = "input")]
        sketches: Option<PathBuf>,
        /// Feature-set file to sketch on the fly.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, default_value_t = 0.7)]
        threshold: f64,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        /// Empty-bin handling: either-empty | joint-empty.
        #[arg(long, default_value = "either-empty")]
        mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        identity_perm: bool,
    },

    /// Near-duplicate detection for a list of query documents.
    Dedup {
        #[arg(long = "in")]
        input: PathBuf,
        /// File with one query doc id per line (default: every document).
        #[arg(long)]
        queries: Option<PathBuf>,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, default_value_t = 0.7)]
        threshold: f64,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        #[arg(long, default_value = "either-empty")]
        mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        identity_perm: bool,
        #[arg(long)]
        report: PathBuf,
    },

    /// Precision/recall/latency table across methods (one row per method).
    Bench {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated method list.
        #[arg(long, default_value = "minhash,oph,goph,hoph")]
        methods: String,
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Number of queries when no query file is given.
        #[arg(long, default_value_t = 100)]
        query_count: usize,
        #[arg(long, default_value_t = 100)]
        kprime: usize,
        #[arg(long, default_value_t = 10)]
        groups: usize,
        #[arg(long, default_value = "1:1")]
        ratio: String,
        #[arg(long, default_value_t = 0.7)]
        threshold: f64,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        #[arg(long, default_value = "either-empty")]
        mode: String,
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_ratio(s: &str) -> Result<(u32, u32), Error> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidArgument(format!("ratio '{s}' is not of the form A:B")))?;
    let a = a.parse().map_err(|_| Error::InvalidArgument(format!("bad ratio part '{a}'")))?;
    let b = b.parse().map_err(|_| Error::InvalidArgument(format!("bad ratio part '{b}'")))?;
    Ok((a, b))
}

fn read_queries(path: &PathBuf) -> Result<Vec<String>, Error> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        let id = line.trim();
        if !id.is_empty() {
            out.push(id.to_string());
        }
    }
    Ok(out)
}

fn main() {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("error: cannot configure {workers} workers: {e}");
            std::process::exit(2);
        }
    }
    match run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InvalidArgument(_) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Gen { docs, size, pairs, jaccard, vocab, seed, out } => {
            let corpus = gen_corpus(docs, size, pairs, jaccard, vocab, seed)?;
            corpus.save(&out)?;
            println!("wrote {} documents to {}", corpus.len(), out.display());
            Ok(())
        }
        Command::Sketch { input, method, seed, identity_perm, out } => {
            let corpus = Corpus::load(&input)?;
            let config = method.config()?;
            let file = build_sketch_file(&corpus, &config, seed, identity_perm)?;
            file.save(&out)?;
            println!("wrote {} sketches to {}", corpus.len(), out.display());
            Ok(())
        }
        Command::Compare {
            sketches,
            input,
            a,
            b,
            method,
            threshold,
            epsilon,
            mode,
            seed,
            identity_perm,
        } => {
            let config = method.config()?;
            let mode: EmptyBinMode = mode.parse()?;
            let params = FilterParams64::new(threshold, epsilon, method.kprime, method.groups)?;
            let file = match (sketches, input) {
                (Some(path), _) => SketchFile::load(&path)?,
                (None, Some(path)) => {
                    let corpus = Corpus::load(&path)?;
                    build_sketch_file(&corpus, &config, seed, identity_perm)?
                }
                (None, None) => {
                    return Err(Error::InvalidArgument(
                        "compare needs --sketches or --in".into(),
                    ))
                }
            };
            compare_and_print(&file, &config, &a, &b, &params, mode)
        }
        Command::Dedup {
            input,
            queries,
            method,
            threshold,
            epsilon,
            mode,
            seed,
            identity_perm,
            report,
        } => {
            let corpus = Corpus::load(&input)?;
            let config = method.config()?;
            let mode: EmptyBinMode = mode.parse()?;
            let params = FilterParams64::new(threshold, epsilon, method.kprime, method.groups)?;
            let query_ids = match queries {
                Some(path) => read_queries(&path)?,
                None => corpus.docs().iter().map(|(id, _)| id.clone()).collect(),
            };
            let out = detect(&corpus, &query_ids, &config, &params, mode, seed, identity_perm)?;
            out.save(&report)?;
            println!(
                "method={} retrieved={} precision={:.4} recall={:.4} wall_ms={:.1}",
                out.method,
                out.retrieved.len(),
                out.precision,
                out.recall,
                out.wall_ms
            );
            Ok(())
        }
        Command::Bench {
            input,
            methods,
            queries,
            query_count,
            kprime,
            groups,
            ratio,
            threshold,
            epsilon,
            mode,
            repeat,
            seed,
        } => {
            if repeat == 0 {
                return Err(Error::InvalidArgument("--repeat must be >= 1".into()));
            }
            let corpus = Corpus::load(&input)?;
            let mode: EmptyBinMode = mode.parse()?;
            let params = FilterParams64::new(threshold, epsilon, kprime, groups)?;
            let (ra, rb) = parse_ratio(&ratio)?;
            let query_ids: Vec<String> = match queries {
                Some(path) => read_queries(&path)?,
                None => corpus
                    .docs()
                    .iter()
                    .take(query_count)
                    .map(|(id, _)| id.clone())
                    .collect(),
            };
            let mut stdout = std::io::stdout().lock();
            writeln!(
                stdout,
                "#method\tprecision\trecall\tmean_groups\tmean_bins\twall_ms_mean\trepeats"
            )?;
            for name in methods.split(',') {
                let config = match name.trim() {
                    "minhash" => MethodConfig::MinHash { k: kprime * groups },
                    "oph" => MethodConfig::Oph { bins: kprime * groups },
                    "goph" => MethodConfig::Goph { bins_per_group: kprime, groups },
                    "hoph" => {
                        MethodConfig::Hoph { bins_per_group: kprime, ratio_a: ra, ratio_b: rb }
                    }
                    other => {
                        return Err(Error::InvalidArgument(format!("unknown method '{other}'")))
                    }
                };
                let mut wall = 0.0;
                let mut last = None;
                for _ in 0..repeat {
                    let r = detect(&corpus, &query_ids, &config, &params, mode, seed, false)?;
                    wall += r.wall_ms;
                    last = Some(r);
                }
                let r = last.expect("repeat >= 1");
                writeln!(
                    stdout,
                    "{}\t{}\t{}\t{}\t{}\t{:.3}\t{}",
                    r.method,
                    r.precision,
                    r.recall,
                    r.mean_groups_compared.map(|g| g.to_string()).unwrap_or_default(),
                    r.mean_bins_compared,
                    wall / repeat as f64,
                    repeat
                )?;
            }
            Ok(())
        }
    }
}

fn build_sketch_file(
    corpus: &Corpus,
    config: &MethodConfig,
    seed: u64,
    identity: bool,
) -> Result<SketchFile, Error> {
    let vocab = corpus.vocab_size();
    let perm = if identity { Permutation::identity(vocab)? } else { Permutation::generate(seed, vocab)? };
    match config {
        MethodConfig::MinHash { k } => {
            let hasher = MinHasher::from_master_seed(seed, *k, vocab)?;
            let entries = corpus
                .docs()
                .iter()
                .map(|(id, set)| Ok((id.clone(), hasher.sketch(set)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            SketchFile::from_minhash(vocab, entries)
        }
        MethodConfig::Oph { bins } => {
            let layout = FlatBinLayout::new(vocab, *bins)?;
            let entries = corpus
                .docs()
                .iter()
                .map(|(id, set)| Ok((id.clone(), oph::sketch(set, &perm, &layout)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            SketchFile::from_flat(entries)
        }
        MethodConfig::Goph { bins_per_group, groups } => {
            let layout = FlatBinLayout::new(vocab, bins_per_group * groups)?;
            let entries = corpus
                .docs()
                .iter()
                .map(|(id, set)| Ok((id.clone(), oph::sketch(set, &perm, &layout)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            SketchFile::from_flat(entries)
        }
        MethodConfig::Hoph { bins_per_group, ratio_a, ratio_b } => {
            let layout = HierarchicalBinLayout::new(vocab, *ratio_a, *ratio_b, *bins_per_group)?;
            let entries = corpus
                .docs()
                .iter()
                .map(|(id, set)| Ok((id.clone(), hoph::sketch(set, &perm, &layout)?)))
                .collect::<Result<Vec<_>, Error>>()?;
            SketchFile::from_hierarchical(entries)
        }
    }
}

fn compare_and_print(
    file: &SketchFile,
    config: &MethodConfig,
    a: &str,
    b: &str,
    params: &FilterParams64,
    mode: EmptyBinMode,
) -> Result<(), Error> {
    let mut stdout = std::io::stdout().lock();
    match config {
        MethodConfig::MinHash { .. } => {
            let sa = file.minhash_sketch(a)?;
            let sb = file.minhash_sketch(b)?;
            let est: f64 = minhash::estimate(&sa, &sb)?;
            writeln!(stdout, "estimate\t{est}")?;
        }
        MethodConfig::Oph { .. } => {
            let sa = file.flat_sketch(a)?;
            let sb = file.flat_sketch(b)?;
            let est: f64 = oph::compare(&sa, &sb, mode)?;
            writeln!(stdout, "estimate\t{est}")?;
        }
        MethodConfig::Goph { bins_per_group, groups } => {
            let sa = file.flat_sketch(a)?;
            let sb = file.flat_sketch(b)?;
            let va = GroupedSketchView::new(&sa, *groups, *bins_per_group)?;
            let vb = GroupedSketchView::new(&sb, *groups, *bins_per_group)?;
            let (verdict, trace) = permsketch::goph::compare(&va, &vb, params, mode)?;
            print_verdict(&mut stdout, verdict.decision.to_string(), verdict.estimate, &trace)?;
        }
        MethodConfig::Hoph { bins_per_group, .. } => {
            let sa = file.hierarchical_sketch(a)?;
            let sb = file.hierarchical_sketch(b)?;
            let hp = FilterParams64 { bins_per_group: *bins_per_group, ..*params };
            let (verdict, trace) = hoph::compare(&sa, &sb, &hp, mode)?;
            print_verdict(&mut stdout, verdict.decision.to_string(), verdict.estimate, &trace)?;
        }
    }
    Ok(())
}

fn print_verdict(
    out: &mut impl Write,
    decision: String,
    estimate: Option<f64>,
    trace: &FilterTrace64,
) -> Result<(), Error> {
    writeln!(out, "verdict\t{decision}")?;
    if let Some(est) = estimate {
        writeln!(out, "estimate\t{est}")?;
    }
    writeln!(out, "#group\tcum_matches\trequired\ttail\taction")?;
    for r in &trace.records {
        let action = match r.action {
            FilterAction::Continue => "continue",
            FilterAction::AcceptEarly => "accept-early",
            FilterAction::RejectEarly => "reject-early",
            FilterAction::FinalVerdict => "final-verdict",
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.group,
            r.cumulative_matches,
            r.required.map(|v| format!("{v:.4}")).unwrap_or_default(),
            r.tail.map(|v| format!("{v:.6e}")).unwrap_or_default(),
            action
        )?;
    }
    Ok(())
}
