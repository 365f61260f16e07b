//! Baseline rankers: tf-idf VSM, rVSM and precomputed-embedding similarity.

mod embedding;
mod index;
mod ranked;

pub use embedding::{rank_embeddings, EmbeddingRecord, EmbeddingStore, QUERY_PREFIX};
pub use index::{build_index, rank_rvsm, rank_tfidf, rvsm_length_boost, IndexedDoc, Index};
pub use ranked::{RankedEntry, RankedList};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::TokenList;

/// A query as seen by a ranker: a stable key plus its preprocessed tokens.
///
/// Embedding rankers look vectors up by `key`; term-based rankers use `tokens`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub key: String,
    pub tokens: TokenList,
}

pub trait Ranker: Sync {
    fn rank(&self, query: &Query) -> Result<RankedList>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Rvsm,
    Tfidf,
    Embed,
}

impl Technique {
    pub fn as_str(self) -> &'static str {
        match self {
            Technique::Rvsm => "rvsm",
            Technique::Tfidf => "tfidf",
            Technique::Embed => "embed",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rvsm" => Ok(Technique::Rvsm),
            "tfidf" => Ok(Technique::Tfidf),
            "embed" => Ok(Technique::Embed),
            other => Err(Error::Config(format!("unknown technique `{other}`"))),
        }
    }
}

pub struct TfidfRanker<'a>(pub &'a Index);

impl Ranker for TfidfRanker<'_> {
    fn rank(&self, query: &Query) -> Result<RankedList> {
        Ok(rank_tfidf(self.0, &query.key, &query.tokens))
    }
}

pub struct RvsmRanker<'a>(pub &'a Index);

impl Ranker for RvsmRanker<'_> {
    fn rank(&self, query: &Query) -> Result<RankedList> {
        Ok(rank_rvsm(self.0, &query.key, &query.tokens))
    }
}

/// Ranks a fixed document set from an embedding store.
pub struct EmbeddingRanker<'a> {
    pub store: &'a EmbeddingStore,
    pub paths: Vec<String>,
}

impl Ranker for EmbeddingRanker<'_> {
    fn rank(&self, query: &Query) -> Result<RankedList> {
        rank_embeddings(self.store, &query.key, Some(&self.paths))
    }
}
