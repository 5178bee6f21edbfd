//! Instruction-graph pairs and their retrieval index.

use std::fmt;

use pcg_core::parse_pcg;
use pcg_extract::{build_pcg, synth, ExtractionConfig, PartHierarchy};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bm25::{Bm25Index, IndexError, DEFAULT_B, DEFAULT_K1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetailLevel {
    Short,
    Medium,
    Long,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstructionGraphPair {
    pub id: String,
    pub instruction: String,
    pub detail_level: DetailLevel,
    pub pcg: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: pair `{id}` does not hold a valid graph: {message}")]
    InvalidGraph { line: usize, id: String, message: String },
}

/// Parses JSON Lines, checking that every pair's graph validates.
pub fn load_corpus(jsonl: &str) -> Result<Vec<InstructionGraphPair>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in jsonl.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: InstructionGraphPair = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if let Err(diags) = parse_pcg(&pair.pcg) {
            return Err(CorpusError::InvalidGraph {
                line: i + 1,
                id: pair.id,
                message: diags.first().map(|d| d.to_string()).unwrap_or_default(),
            });
        }
        out.push(pair);
    }
    Ok(out)
}

pub fn to_jsonl(pairs: &[InstructionGraphPair]) -> String {
    let mut s = String::new();
    for p in pairs {
        s.push_str(&serde_json::to_string(p).expect("pair serializes"));
        s.push('\n');
    }
    s
}

/// Corpus plus a BM25 index over its instructions.
#[derive(Debug, Clone)]
pub struct Retriever {
    pub pairs: Vec<InstructionGraphPair>,
    pub index: Bm25Index,
}

impl Retriever {
    pub fn new(pairs: Vec<InstructionGraphPair>) -> Result<Retriever, IndexError> {
        Retriever::with_params(pairs, DEFAULT_K1, DEFAULT_B)
    }

    pub fn with_params(pairs: Vec<InstructionGraphPair>, k1: f64, b: f64) -> Result<Retriever, IndexError> {
        let texts: Vec<&str> = pairs.iter().map(|p| p.instruction.as_str()).collect();
        let index = Bm25Index::build(&texts, k1, b)?;
        Ok(Retriever { pairs, index })
    }

    /// Up to `k` pairs by descending score, ties in corpus order.
    pub fn retrieve(&self, query: &str, k: usize) -> Vec<&InstructionGraphPair> {
        self.index
            .top_k(query, k)
            .into_iter()
            .map(|(i, _)| &self.pairs[i])
            .collect()
    }
}

const OBJECTS: [&str; 8] = ["chair", "table", "cabinet", "shelf", "bench", "desk", "stool", "bed"];
const STYLES: [&str; 8] = ["modern", "rustic", "minimal", "tall", "low", "wide", "compact", "sturdy"];
const MATERIALS: [&str; 5] = ["wooden", "metal", "oak", "pine", "steel"];

struct Described {
    hierarchy: PartHierarchy,
    short: String,
    medium: String,
    long: String,
}

fn describe<R: Rng>(rng: &mut R) -> Described {
    let object = *OBJECTS.choose(rng).unwrap();
    let style = *STYLES.choose(rng).unwrap();
    let material = *MATERIALS.choose(rng).unwrap();
    let rotated = rng.gen_bool(0.5);
    let mut h = synth::random_hierarchy(rng, 6, rotated);
    h.root.label = object.to_string();
    let h = PartHierarchy::new(h.root);
    let mut counts: Vec<(String, usize)> = Vec::new();
    for leaf in h.root.leaves() {
        match counts.iter_mut().find(|(l, _)| *l == leaf.label) {
            Some((_, n)) => *n += 1,
            None => counts.push((leaf.label.clone(), 1)),
        }
    }
    let parts: Vec<String> = counts
        .iter()
        .map(|(l, n)| if *n == 1 { format!("a {l}") } else { format!("{n} {l}s") })
        .collect();
    let list = match parts.len() {
        1 => parts[0].clone(),
        _ => format!("{} and {}", parts[..parts.len() - 1].join(", "), parts[parts.len() - 1]),
    };
    let short = format!("A {style} {object}");
    let medium = format!("A {style} {material} {object} with {list}");
    let long = format!(
        "Create a {style} {material} {object} made of {} box-shaped parts: {list}. Each part can be moved, rotated and resized, and every part group can be switched off.",
        h.root.leaves().len()
    );
    Described {
        hierarchy: h,
        short,
        medium,
        long,
    }
}

/// Deterministic corpus of extracted graphs with generated instructions at
/// all three detail levels.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<InstructionGraphPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = ExtractionConfig::default();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let d = describe(&mut rng);
        let pcg = pcg_core::print_pcg(&build_pcg(&d.hierarchy, &cfg).expect("synthetic boxes are valid"));
        for (level, text) in [
            (DetailLevel::Short, d.short),
            (DetailLevel::Medium, d.medium),
            (DetailLevel::Long, d.long),
        ] {
            if out.len() == n {
                break;
            }
            out.push(InstructionGraphPair {
                id: format!("syn-{:05}", out.len()),
                instruction: text,
                detail_level: level,
                pcg: pcg.clone(),
            });
        }
    }
    out
}

impl fmt::Display for DetailLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetailLevel::Short => "short",
            DetailLevel::Medium => "medium",
            DetailLevel::Long => "long",
        })
    }
}
