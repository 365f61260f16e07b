use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retrieval::RankedList;

/// Bug id -> buggy file paths.
pub type GroundTruth = BTreeMap<String, BTreeSet<String>>;

/// Best 1-based rank of any buggy file; `None` when no buggy file is in the list.
pub type FirstRank = Option<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitsAtK {
    pub k: usize,
    pub hits: usize,
    pub total: usize,
    pub fraction: f64,
}

pub fn first_ranks(rankings: &BTreeMap<String, RankedList>, truth: &GroundTruth) -> Result<BTreeMap<String, FirstRank>> {
    rankings
        .iter()
        .map(|(bug, ranked)| {
            let files = truth
                .get(bug)
                .ok_or_else(|| Error::Eval(format!("bug {bug} has no ground truth")))?;
            Ok((bug.clone(), ranked.first_rank(files)))
        })
        .collect()
}

pub fn hits_from_ranks<'a>(ranks: impl IntoIterator<Item = &'a FirstRank>, k: usize) -> HitsAtK {
    let (mut hits, mut total) = (0, 0);
    for r in ranks {
        total += 1;
        if r.is_some_and(|r| r <= k) {
            hits += 1;
        }
    }
    HitsAtK {
        k,
        hits,
        total,
        fraction: if total == 0 { 0.0 } else { hits as f64 / total as f64 },
    }
}

/// Fraction of bugs with at least one buggy file in the top `k`.
pub fn hits_at_k(rankings: &BTreeMap<String, RankedList>, truth: &GroundTruth, k: usize) -> Result<HitsAtK> {
    Ok(hits_from_ranks(first_ranks(rankings, truth)?.values(), k))
}

/// `(gui - base) / base`, undefined when the baseline is zero.
pub fn relative_improvement(h_gui: f64, h_base: f64) -> Option<f64> {
    (h_base > 0.0).then(|| (h_gui - h_base) / h_base)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovementReport {
    pub out10_to_in10: usize,
    pub in10_to_out10: usize,
    pub inside10_improved: usize,
    pub inside10_deteriorated: usize,
    pub inside10_unchanged: usize,
    pub outside10_improved: usize,
    pub outside10_deteriorated: usize,
    pub outside10_unchanged: usize,
}

impl MovementReport {
    pub fn total(&self) -> usize {
        self.out10_to_in10
            + self.in10_to_out10
            + self.inside10_improved
            + self.inside10_deteriorated
            + self.inside10_unchanged
            + self.outside10_improved
            + self.outside10_deteriorated
            + self.outside10_unchanged
    }
}

const TOP: usize = 10;

/// Classifies each bug by how its first rank moved relative to the top 10.
/// Unranked counts as infinitely far down.
pub fn movement_from_ranks(
    base: &BTreeMap<String, FirstRank>,
    aug: &BTreeMap<String, FirstRank>,
) -> Result<MovementReport> {
    if base.keys().ne(aug.keys()) {
        return Err(Error::Eval("baseline and augmented bug sets differ".into()));
    }
    let mut m = MovementReport::default();
    for (bug, b) in base {
        let b = b.unwrap_or(usize::MAX);
        let a = aug[bug].unwrap_or(usize::MAX);
        let (b_in, a_in) = (b <= TOP, a <= TOP);
        let slot = match (b_in, a_in) {
            (false, true) => &mut m.out10_to_in10,
            (true, false) => &mut m.in10_to_out10,
            (true, true) if a < b => &mut m.inside10_improved,
            (true, true) if a > b => &mut m.inside10_deteriorated,
            (true, true) => &mut m.inside10_unchanged,
            (false, false) if a < b => &mut m.outside10_improved,
            (false, false) if a > b => &mut m.outside10_deteriorated,
            (false, false) => &mut m.outside10_unchanged,
        };
        *slot += 1;
    }
    Ok(m)
}

pub fn rank_movement(
    base: &BTreeMap<String, RankedList>,
    aug: &BTreeMap<String, RankedList>,
    truth: &GroundTruth,
) -> Result<MovementReport> {
    movement_from_ranks(&first_ranks(base, truth)?, &first_ranks(aug, truth)?)
}

/// Exclusive overlap cells: for each non-empty subset of techniques, the
/// number of bugs hit by exactly that subset.
pub type OverlapTable = BTreeMap<BTreeSet<String>, usize>;

pub const MAX_OVERLAP_TECHNIQUES: usize = 16;

pub fn top10_overlap(per_technique: &BTreeMap<String, BTreeSet<String>>) -> Result<OverlapTable> {
    let names: Vec<&String> = per_technique.keys().collect();
    if names.is_empty() || names.len() > MAX_OVERLAP_TECHNIQUES {
        return Err(Error::Eval(format!(
            "overlap needs 1..={MAX_OVERLAP_TECHNIQUES} techniques, got {}",
            names.len()
        )));
    }
    let mut table: OverlapTable = (1u32..1 << names.len())
        .map(|mask| {
            let subset = names
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, n)| (*n).clone())
                .collect();
            (subset, 0)
        })
        .collect();
    let all_bugs: BTreeSet<&String> = per_technique.values().flatten().collect();
    for bug in all_bugs {
        let subset: BTreeSet<String> = per_technique
            .iter()
            .filter(|(_, hits)| hits.contains(bug))
            .map(|(t, _)| t.clone())
            .collect();
        *table.get_mut(&subset).expect("every non-empty subset is present") += 1;
    }
    Ok(table)
}
