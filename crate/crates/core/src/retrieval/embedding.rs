//! Precomputed segment embeddings and max-over-segments cosine ranking.
//!
//! File format (UTF-8, one JSON object per line):
//!
//! ```text
//! {"dim":3}
//! {"path":"app/src/Main.java","segment_index":0,"vector":[0.6,0.8,0.0]}
//! {"path":"query:markor-1","segment_index":0,"vector":[1.0,0.0,0.0]}
//! ```
//!
//! The first non-blank line declares the dimension. Records whose path starts
//! with `query:` hold query segments; everything else is a document segment.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ranked::RankedList;
use crate::error::{Error, Result};

pub const QUERY_PREFIX: &str = "query:";
pub const NORM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub path: String,
    pub segment_index: usize,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    /// key -> segment_index -> vector. Query keys keep their `query:` prefix.
    docs: BTreeMap<String, BTreeMap<usize, Vec<f64>>>,
    queries: BTreeMap<String, BTreeMap<usize, Vec<f64>>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, record: EmbeddingRecord) -> Result<()> {
        if record.vector.len() != self.dim {
            return Err(Error::Embedding(format!(
                "{} segment {}: dimension {} does not match declared {}",
                record.path,
                record.segment_index,
                record.vector.len(),
                self.dim
            )));
        }
        let norm = record.vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Embedding(format!(
                "{} segment {}: vector norm {norm} is not unit",
                record.path, record.segment_index
            )));
        }
        let map = if record.path.starts_with(QUERY_PREFIX) {
            &mut self.queries
        } else {
            &mut self.docs
        };
        let segments = map.entry(record.path.clone()).or_default();
        if segments.insert(record.segment_index, record.vector).is_some() {
            return Err(Error::Embedding(format!(
                "{} segment {} appears twice",
                record.path, record.segment_index
            )));
        }
        Ok(())
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut store: Option<Self> = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Embedding(format!("line {}: {e}", lineno + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |e: serde_json::Error| Error::Embedding(format!("line {}: {e}", lineno + 1));
            match store.as_mut() {
                None => {
                    let header: Header = serde_json::from_str(&line).map_err(bad)?;
                    if header.dim == 0 {
                        return Err(Error::Embedding("declared dimension is zero".into()));
                    }
                    store = Some(Self::new(header.dim));
                }
                Some(s) => s.insert(serde_json::from_str(&line).map_err(bad)?)?,
            }
        }
        store.ok_or_else(|| Error::Embedding("missing header line".into()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", serde_json::to_string(&Header { dim: self.dim })?)?;
        for map in [&self.docs, &self.queries] {
            for (path, segments) in map {
                for (&segment_index, vector) in segments {
                    let rec = EmbeddingRecord {
                        path: path.clone(),
                        segment_index,
                        vector: vector.clone(),
                    };
                    writeln!(out, "{}", serde_json::to_string(&rec)?)?;
                }
            }
        }
        Ok(())
    }

    pub fn doc_paths(&self) -> impl Iterator<Item = &str> + '_ {
        self.docs.keys().map(String::as_str)
    }

    pub fn has_query(&self, query_id: &str) -> bool {
        self.queries.contains_key(query_id)
    }

    pub fn has_doc(&self, path: &str) -> bool {
        self.docs.contains_key(path)
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Scores each document by the best cosine over all (query segment, document
/// segment) pairs. `query_id` is the full key, e.g. `query:markor-1`.
///
/// When `paths` is given, exactly those documents are ranked and any of them
/// missing from the store is an error; otherwise every stored document is
/// ranked.
pub fn rank_embeddings(
    store: &EmbeddingStore,
    query_id: &str,
    paths: Option<&[String]>,
) -> Result<RankedList> {
    let query = store
        .queries
        .get(query_id)
        .ok_or_else(|| Error::Embedding(format!("no vectors for query {query_id}")))?;
    let score_doc = |segments: &BTreeMap<usize, Vec<f64>>| {
        query
            .values()
            .flat_map(|q| segments.values().map(move |d| cosine(q, d)))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let scores: Vec<(String, f64)> = match paths {
        Some(paths) => {
            let missing: Vec<&str> = paths
                .iter()
                .filter(|p| !store.docs.contains_key(*p))
                .map(String::as_str)
                .collect();
            if !missing.is_empty() {
                return Err(Error::Embedding(format!(
                    "documents absent from store: {}",
                    missing.join(", ")
                )));
            }
            paths
                .iter()
                .map(|p| (p.clone(), score_doc(&store.docs[p])))
                .collect()
        }
        None => store
            .docs
            .iter()
            .map(|(p, segs)| (p.clone(), score_doc(segs)))
            .collect(),
    };
    if scores.is_empty() {
        return Err(Error::Embedding("store holds no documents".into()));
    }
    Ok(RankedList::from_scores(query_id, scores))
}
