use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::ranked::RankedList;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::preprocess::TokenList;

/// One indexed document: sparse tf-idf vector sorted by term id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedDoc {
    pub path: String,
    /// Token count (`#terms`).
    pub length: usize,
    pub vector: Vec<(u32, f64)>,
    pub norm: f64,
}

/// tf-idf index over the rankable documents of one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    pub app_id: String,
    /// Sorted vocabulary; a term's id is its position.
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    pub docs: Vec<IndexedDoc>,
    /// Rankable documents with no tokens. They appear in rankings at score 0.
    pub excluded: Vec<String>,
}

fn tf_weight(tf: usize) -> f64 {
    1.0 + (tf as f64).ln()
}

fn term_counts<'a>(tokens: impl IntoIterator<Item = &'a String>) -> BTreeMap<&'a str, usize> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}

fn l2(vector: &[(u32, f64)]) -> f64 {
    vector.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
}

/// Builds `weight(t, d) = (1 + ln tf) * ln(N / df)` over the rankable documents.
pub fn build_index(corpus: &Corpus) -> Result<Index> {
    let mut excluded = Vec::new();
    let mut counted: Vec<(&str, usize, BTreeMap<&str, usize>)> = Vec::new();
    for doc in corpus.rankable() {
        if doc.tokens.is_empty() {
            warn!(path = %doc.path, "excluding document with no tokens from index");
            excluded.push(doc.path.clone());
            continue;
        }
        counted.push((&doc.path, doc.tokens.len(), term_counts(&doc.tokens)));
    }
    if counted.is_empty() {
        return Err(Error::EmptyIndex);
    }

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, _, counts) in &counted {
        for term in counts.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let n_docs = counted.len() as f64;
    let terms: Vec<String> = df.keys().map(|t| t.to_string()).collect();
    let idf: Vec<f64> = df.values().map(|&d| (n_docs / d as f64).ln()).collect();
    let ids: HashMap<&str, u32> = df.keys().enumerate().map(|(i, t)| (*t, i as u32)).collect();

    let docs = counted
        .into_iter()
        .map(|(path, length, counts)| {
            let vector: Vec<(u32, f64)> = counts
                .into_iter()
                .map(|(t, tf)| {
                    let id = ids[t];
                    (id, tf_weight(tf) * idf[id as usize])
                })
                .filter(|(_, w)| *w != 0.0)
                .collect();
            IndexedDoc {
                path: path.to_string(),
                length,
                norm: l2(&vector),
                vector,
            }
        })
        .collect();

    Ok(Index {
        app_id: corpus.app_id.clone(),
        terms,
        idf,
        docs,
        excluded,
    })
}

impl Index {
    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.terms
            .binary_search_by(|t| t.as_str().cmp(term))
            .ok()
            .map(|i| i as u32)
    }

    pub fn idf_of(&self, term: &str) -> Option<f64> {
        self.term_id(term).map(|id| self.idf[id as usize])
    }

    /// Query vector under the index's idf; unknown terms are dropped. Terms
    /// iterate in sorted order, which is also term-id order.
    pub fn query_vector(&self, query: &TokenList) -> Vec<(u32, f64)> {
        term_counts(query)
            .into_iter()
            .filter_map(|(t, tf)| {
                let id = self.term_id(t)?;
                let w = tf_weight(tf) * self.idf[id as usize];
                (w != 0.0).then_some((id, w))
            })
            .collect()
    }

    fn cosines(&self, query: &TokenList) -> Vec<f64> {
        let q = self.query_vector(query);
        let q_norm = l2(&q);
        self.docs
            .iter()
            .map(|d| {
                if q_norm == 0.0 || d.norm == 0.0 {
                    0.0
                } else {
                    sparse_dot(&q, &d.vector) / (q_norm * d.norm)
                }
            })
            .collect()
    }

    fn ranked(&self, query_id: &str, scores: Vec<f64>) -> RankedList {
        let indexed = self.docs.iter().map(|d| d.path.clone()).zip(scores);
        let empty = self.excluded.iter().map(|p| (p.clone(), 0.0));
        RankedList::from_scores(query_id, indexed.chain(empty))
    }

    /// Min-max normalized document lengths; 0.5 everywhere when all lengths agree.
    pub fn normalized_lengths(&self) -> Vec<f64> {
        let min = self.docs.iter().map(|d| d.length).min().unwrap_or(0);
        let max = self.docs.iter().map(|d| d.length).max().unwrap_or(0);
        self.docs
            .iter()
            .map(|d| {
                if max == min {
                    0.5
                } else {
                    (d.length - min) as f64 / (max - min) as f64
                }
            })
            .collect()
    }
}

fn sparse_dot(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Logistic length boost `1 / (1 + e^-x)` applied to a normalized length.
pub fn rvsm_length_boost(normalized_length: f64) -> f64 {
    1.0 / (1.0 + (-normalized_length).exp())
}

/// Cosine similarity between tf-idf vectors of the query and each document.
pub fn rank_tfidf(index: &Index, query_id: &str, query: &TokenList) -> RankedList {
    index.ranked(query_id, index.cosines(query))
}

/// rVSM: cosine similarity scaled by the logistic boost of the normalized document length.
pub fn rank_rvsm(index: &Index, query_id: &str, query: &TokenList) -> RankedList {
    let scores = index
        .cosines(query)
        .into_iter()
        .zip(index.normalized_lengths())
        .map(|(cos, norm)| rvsm_length_boost(norm) * cos)
        .collect();
    index.ranked(query_id, scores)
}
