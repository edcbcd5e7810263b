//! Sketch file persistence for the CLI: one JSON document holding the
//! layout, the permutation key, and every document's sketch values.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hoph::HophSketch;
use crate::layout::{FlatBinLayout, HierarchicalBinLayout};
use crate::perm::PermKey;
use crate::sketch::{BinValue, MinHashSketch, Sketch};

#[derive(Debug, Serialize, Deserialize)]
pub enum SketchFile {
    MinHash {
        vocab_size: u32,
        seeds: Vec<u64>,
        entries: Vec<(String, Vec<u32>)>,
    },
    Flat {
        layout: FlatBinLayout,
        perm: PermKey,
        entries: Vec<(String, Vec<BinValue>)>,
    },
    Hierarchical {
        layout: HierarchicalBinLayout,
        perm: PermKey,
        entries: Vec<(String, Vec<Vec<BinValue>>)>,
    },
}

impl SketchFile {
    pub fn from_flat(entries: Vec<(String, Sketch)>) -> Result<Self> {
        let first = entries.first().ok_or_else(|| Error::invalid("no sketches to save"))?;
        let layout = *first.1.layout();
        let perm = first.1.perm_key();
        let entries = entries
            .into_iter()
            .map(|(id, s)| (id, s.values().to_vec()))
            .collect();
        Ok(SketchFile::Flat { layout, perm, entries })
    }

    pub fn from_hierarchical(entries: Vec<(String, HophSketch)>) -> Result<Self> {
        let first = entries.first().ok_or_else(|| Error::invalid("no sketches to save"))?;
        let layout = first.1.layout().clone();
        let perm = first.1.perm_key();
        let entries = entries
            .into_iter()
            .map(|(id, s)| (id, s.blocks().to_vec()))
            .collect();
        Ok(SketchFile::Hierarchical { layout, perm, entries })
    }

    pub fn from_minhash(vocab_size: u32, entries: Vec<(String, MinHashSketch)>) -> Result<Self> {
        let seeds = entries
            .first()
            .ok_or_else(|| Error::invalid("no sketches to save"))?
            .1
            .seeds()
            .to_vec();
        let entries = entries
            .into_iter()
            .map(|(id, s)| (id, s.fingerprints().to_vec()))
            .collect();
        Ok(SketchFile::MinHash { vocab_size, seeds, entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)
            .map_err(|e| Error::invalid(format!("cannot serialize sketches: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| Error::DataFormat { line: 0, msg: format!("bad sketch file: {e}") })
    }

    pub fn doc_ids(&self) -> Vec<&str> {
        match self {
            SketchFile::MinHash { entries, .. } => entries.iter().map(|(id, _)| id.as_str()).collect(),
            SketchFile::Flat { entries, .. } => entries.iter().map(|(id, _)| id.as_str()).collect(),
            SketchFile::Hierarchical { entries, .. } => {
                entries.iter().map(|(id, _)| id.as_str()).collect()
            }
        }
    }

    /// Rebuilds the flat sketch of one document.
    pub fn flat_sketch(&self, id: &str) -> Result<Sketch> {
        match self {
            SketchFile::Flat { layout, perm, entries } => {
                let values = lookup(entries, id)?;
                Sketch::from_parts(*layout, *perm, values.clone())
            }
            _ => Err(Error::invalid("sketch file does not hold flat sketches")),
        }
    }

    pub fn hierarchical_sketch(&self, id: &str) -> Result<HophSketch> {
        match self {
            SketchFile::Hierarchical { layout, perm, entries } => {
                let blocks = lookup(entries, id)?;
                HophSketch::from_parts(layout.clone(), *perm, blocks.clone())
            }
            _ => Err(Error::invalid("sketch file does not hold hierarchical sketches")),
        }
    }

    pub fn minhash_sketch(&self, id: &str) -> Result<MinHashSketch> {
        match self {
            SketchFile::MinHash { vocab_size, seeds, entries } => {
                let prints = lookup(entries, id)?;
                Ok(MinHashSketch::new(seeds.clone(), *vocab_size, prints.clone()))
            }
            _ => Err(Error::invalid("sketch file does not hold minhash sketches")),
        }
    }
}

fn lookup<'a, T>(entries: &'a [(String, T)], id: &str) -> Result<&'a T> {
    entries
        .iter()
        .find(|(k, _)| k == id)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::invalid(format!("doc id '{id}' not present in sketch file")))
}

/// Validates that all entries share the ids of `expected` (used when a
/// sketch file must cover a corpus).
pub fn check_ids_cover(file: &SketchFile, expected: &[String]) -> Result<()> {
    let have: HashMap<&str, ()> = file.doc_ids().into_iter().map(|id| (id, ())).collect();
    for id in expected {
        if !have.contains_key(id.as_str()) {
            return Err(Error::invalid(format!("doc id '{id}' missing from sketch file")));
        }
    }
    Ok(())
}
