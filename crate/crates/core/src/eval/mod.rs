//! Evaluation metrics and statistics.

mod metrics;
mod wilcoxon;

pub use metrics::{
    first_ranks, hits_at_k, hits_from_ranks, movement_from_ranks, rank_movement,
    relative_improvement, top10_overlap, FirstRank, GroundTruth, HitsAtK, MovementReport,
    OverlapTable,
};
pub use wilcoxon::{wilcoxon_signed_rank, Alternative, WilcoxonMethod, WilcoxonResult, EXACT_MAX_N};
