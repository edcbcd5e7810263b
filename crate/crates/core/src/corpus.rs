//! Corpus handling: the feature-set file format, text shingling, the exact
//! Jaccard oracle, and synthetic pair/corpus generation with controlled
//! similarity.
//!
//! Feature-set files are UTF-8 text: a header line `#vocab_size=<N>`, then
//! one document per line as `doc_id<TAB>id1 id2 id3 ...` with ascending
//! integer IDs. Visual-word ID exports use the same shape (one image per
//! line).

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::set::FeatureSet;

/// An ordered collection of documents sharing one vocabulary.
#[derive(Debug, Clone)]
pub struct Corpus {
    docs: Vec<(String, FeatureSet)>,
    index: HashMap<String, usize>,
    vocab_size: u32,
}

impl Corpus {
    pub fn new(vocab_size: u32) -> Self {
        Self { docs: Vec::new(), index: HashMap::new(), vocab_size }
    }

    pub fn push(&mut self, id: impl Into<String>, set: FeatureSet) -> Result<()> {
        let id = id.into();
        if set.vocab_size() != self.vocab_size {
            return Err(Error::invalid(format!(
                "document '{id}' has vocabulary {}, corpus uses {}",
                set.vocab_size(),
                self.vocab_size
            )));
        }
        if self.index.contains_key(&id) {
            return Err(Error::invalid(format!("duplicate doc id '{id}'")));
        }
        self.index.insert(id.clone(), self.docs.len());
        self.docs.push((id, set));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn docs(&self) -> &[(String, FeatureSet)] {
        &self.docs
    }

    pub fn get(&self, id: &str) -> Option<&FeatureSet> {
        self.index.get(id).map(|&i| &self.docs[i].1)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Parses the feature-set file format. Errors carry the offending line.
    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::DataFormat { line: 1, msg: "empty file".into() })?;
        let header = header?;
        let vocab_size: u32 = header
            .strip_prefix("#vocab_size=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::DataFormat {
                line: 1,
                msg: format!("expected '#vocab_size=<N>' header, got '{header}'"),
            })?;
        let mut corpus = Corpus::new(vocab_size);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (id, rest) = line.split_once('\t').ok_or_else(|| Error::DataFormat {
                line: lineno,
                msg: "expected 'doc_id<TAB>ids...'".into(),
            })?;
            let mut ids = Vec::new();
            for tok in rest.split_whitespace() {
                let v: u32 = tok.parse().map_err(|_| Error::DataFormat {
                    line: lineno,
                    msg: format!("bad feature id '{tok}'"),
                })?;
                ids.push(v);
            }
            let set = FeatureSet::new(ids, vocab_size).map_err(|e| Error::DataFormat {
                line: lineno,
                msg: e.to_string(),
            })?;
            corpus.push(id, set).map_err(|e| Error::DataFormat {
                line: lineno,
                msg: e.to_string(),
            })?;
        }
        Ok(corpus)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn write(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "#vocab_size={}", self.vocab_size)?;
        for (id, set) in &self.docs {
            write!(w, "{id}\t")?;
            let mut first = true;
            for v in set.ids() {
                if !first {
                    write!(w, " ")?;
                }
                write!(w, "{v}")?;
                first = false;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write(&mut w)
    }
}

/// Exact Jaccard similarity `|a ∩ b| / |a ∪ b|` by sorted merge.
pub fn exact_jaccard<F: Real>(a: &FeatureSet, b: &FeatureSet) -> Result<F> {
    if a.vocab_size() != b.vocab_size() {
        return Err(Error::invalid("sets use different vocabularies"));
    }
    let (inter, union) = a.overlap_counts(b);
    if union == 0 {
        return Err(Error::UndefinedEstimate(
            "jaccard of two empty sets is undefined".into(),
        ));
    }
    Ok(F::from_count(inter) / F::from_count(union))
}

/// Seeded 64-bit FNV-1a; stable across platforms and builds.
fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64 ^ seed.wrapping_mul(0x9e3779b97f4a7c15);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Lowercases, whitespace-tokenizes, forms `w`-grams, hashes each to 64
/// bits and reduces modulo the vocabulary. Texts with fewer than `w` tokens
/// yield an empty set.
pub fn shingle_text(text: &str, w: usize, vocab_size: u32, seed: u64) -> Result<FeatureSet> {
    if w == 0 {
        return Err(Error::invalid("shingle width must be >= 1"));
    }
    if vocab_size == 0 {
        return Err(Error::invalid("vocabulary size must be >= 1"));
    }
    let lower = text.to_lowercase();
    let tokens: Vec<&str> = lower.split_whitespace().collect();
    if tokens.len() < w {
        return Ok(FeatureSet::empty(vocab_size));
    }
    let mut ids: Vec<u32> = tokens
        .windows(w)
        .map(|gram| {
            let joined = gram.join(" ");
            (fnv1a64(seed, joined.as_bytes()) % vocab_size as u64) as u32
        })
        .collect();
    ids.sort_unstable();
    ids.dedup();
    FeatureSet::new(ids, vocab_size)
}

/// Intersection size needed for sets of size `s` to hit Jaccard `j`:
/// `i = round(2sj / (1+j))`.
pub fn intersection_for_jaccard(size: usize, jaccard: f64) -> usize {
    (2.0 * size as f64 * jaccard / (1.0 + jaccard)).round() as usize
}

/// Two sets of size `size` with exactly `intersection` shared elements,
/// sampled without replacement. `exact_jaccard` of the result is
/// `intersection / (2*size - intersection)` exactly.
pub fn gen_pair_counts(
    size: usize,
    intersection: usize,
    vocab_size: u32,
    seed: u64,
) -> Result<(FeatureSet, FeatureSet)> {
    if size == 0 {
        return Err(Error::invalid("set size must be >= 1"));
    }
    if intersection > size {
        return Err(Error::invalid("intersection cannot exceed set size"));
    }
    let union = 2 * size - intersection;
    if union as u64 > vocab_size as u64 {
        return Err(Error::invalid(format!(
            "union of {union} ids does not fit vocabulary of {vocab_size}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = sample_distinct(&mut rng, union, vocab_size);
    let shared = &pool[..intersection];
    let only_a = &pool[intersection..size];
    let only_b = &pool[size..];
    let mut a: Vec<u32> = shared.iter().chain(only_a).copied().collect();
    let mut b: Vec<u32> = shared.iter().chain(only_b).copied().collect();
    a.sort_unstable();
    b.sort_unstable();
    Ok((FeatureSet::new(a, vocab_size)?, FeatureSet::new(b, vocab_size)?))
}

/// Two sets of size `size` with target Jaccard `jaccard` (realized through
/// the rounded intersection size).
pub fn gen_pair(
    size: usize,
    jaccard: f64,
    vocab_size: u32,
    seed: u64,
) -> Result<(FeatureSet, FeatureSet)> {
    if !(0.0..=1.0).contains(&jaccard) {
        return Err(Error::invalid("target jaccard must lie in [0, 1]"));
    }
    gen_pair_counts(size, intersection_for_jaccard(size, jaccard), vocab_size, seed)
}

/// `count` distinct IDs from `[0, vocab)`, uniformly.
///
/// Uses a partial Fisher-Yates over a sparse map so huge vocabularies do
/// not require materializing the full range.
fn sample_distinct(rng: &mut ChaCha8Rng, count: usize, vocab: u32) -> Vec<u32> {
    debug_assert!(count as u64 <= vocab as u64);
    let mut swapped: HashMap<u32, u32> = HashMap::new();
    let mut out = Vec::with_capacity(count);
    for i in 0..count as u32 {
        let j = rng.gen_range(i..vocab);
        let vj = *swapped.get(&j).unwrap_or(&j);
        let vi = *swapped.get(&i).unwrap_or(&i);
        out.push(vj);
        swapped.insert(j, vi);
    }
    out
}

/// A random document of `size` distinct IDs.
pub fn gen_doc(size: usize, vocab_size: u32, seed: u64) -> Result<FeatureSet> {
    if size as u64 > vocab_size as u64 {
        return Err(Error::invalid("document size exceeds vocabulary"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = sample_distinct(&mut rng, size, vocab_size);
    ids.sort_unstable();
    FeatureSet::new(ids, vocab_size)
}

/// Synthetic corpus: `pairs` similar pairs at the target Jaccard (documents
/// `p<i>a`/`p<i>b`), padded with independent random documents (`d<i>`) up
/// to `docs` total.
pub fn gen_corpus(
    docs: usize,
    size: usize,
    pairs: usize,
    jaccard: f64,
    vocab_size: u32,
    seed: u64,
) -> Result<Corpus> {
    if docs == 0 {
        return Err(Error::invalid("corpus needs at least one document"));
    }
    if 2 * pairs > docs {
        return Err(Error::invalid(format!(
            "{pairs} pairs need {} documents, corpus has {docs}",
            2 * pairs
        )));
    }
    let mut corpus = Corpus::new(vocab_size);
    let width = (docs.max(2) - 1).to_string().len();
    for i in 0..pairs {
        let (a, b) = gen_pair(size, jaccard, vocab_size, crate::mix_seed(seed, i as u64))?;
        corpus.push(format!("p{i:0width$}a"), a)?;
        corpus.push(format!("p{i:0width$}b"), b)?;
    }
    for i in 0..docs - 2 * pairs {
        let d = gen_doc(size, vocab_size, crate::mix_seed(seed, (pairs + i) as u64 | 1 << 62))?;
        corpus.push(format!("d{i:0width$}"), d)?;
    }
    Ok(corpus)
}
