use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub path: String,
    pub score: f64,
}

/// Ordered retrieval result. Position 0 is rank 1.
///
/// Lists built by [`RankedList::from_scores`] are sorted by descending score
/// with ties broken by ascending path. Re-ranked lists keep their scores but
/// are ordered positionally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_id: String,
    entries: Vec<RankedEntry>,
}

pub(crate) fn score_order(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.path.cmp(&b.path))
}

impl RankedList {
    pub fn from_scores(query_id: impl Into<String>, scores: impl IntoIterator<Item = (String, f64)>) -> Self {
        let mut entries: Vec<RankedEntry> = scores
            .into_iter()
            .map(|(path, score)| RankedEntry { path, score })
            .collect();
        entries.sort_by(score_order);
        entries.dedup_by(|a, b| a.path == b.path);
        Self {
            query_id: query_id.into(),
            entries,
        }
    }

    /// Wraps entries in the given order. Callers guarantee unique paths.
    pub fn from_ordered(query_id: impl Into<String>, entries: Vec<RankedEntry>) -> Self {
        debug_assert_eq!(
            entries.iter().map(|e| &e.path).collect::<BTreeSet<_>>().len(),
            entries.len()
        );
        Self {
            query_id: query_id.into(),
            entries,
        }
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.path.as_str())
    }

    /// 1-based rank of `path`.
    pub fn rank_of(&self, path: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.path == path).map(|i| i + 1)
    }

    /// Best 1-based rank among `targets`, if any of them is present.
    pub fn first_rank<'a, I>(&self, targets: I) -> Option<usize>
    where
        I: IntoIterator<Item = &'a String>,
    {
        let targets: BTreeSet<&str> = targets.into_iter().map(String::as_str).collect();
        self.entries
            .iter()
            .position(|e| targets.contains(e.path.as_str()))
            .map(|i| i + 1)
    }

    pub fn into_entries(self) -> Vec<RankedEntry> {
        self.entries
    }
}
