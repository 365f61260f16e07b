use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{hits_from_ranks, FirstRank, HitsAtK, MovementReport, OverlapTable, WilcoxonResult};
use crate::mapping::MappingDiagnostics;
use crate::retrieval::Technique;

pub const BASELINE: &str = "baseline";
pub const HIT_KS: [usize; 3] = [1, 5, 10];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub bug_id: String,
    pub reason: String,
}

/// Results of one (technique, configuration) pair over all evaluated bugs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    /// Canonical configuration string, or `baseline`.
    pub config: String,
    pub hits: Vec<HitsAtK>,
    /// Relative Hits@10 improvement over the technique's baseline.
    pub rel_improvement_at_10: Option<f64>,
    pub first_ranks: BTreeMap<String, FirstRank>,
    /// Bugs whose filter set was empty, so filtering was skipped.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filter_skipped: Vec<String>,
}

impl EntryReport {
    pub fn new(config: String, first_ranks: BTreeMap<String, FirstRank>, filter_skipped: Vec<String>) -> Self {
        let hits = HIT_KS
            .iter()
            .map(|&k| hits_from_ranks(first_ranks.values(), k))
            .collect();
        Self {
            config,
            hits,
            rel_improvement_at_10: None,
            first_ranks,
            filter_skipped,
        }
    }

    pub fn hits_at(&self, k: usize) -> Option<&HitsAtK> {
        self.hits.iter().find(|h| h.k == k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueReport {
    pub technique: Technique,
    pub baseline: EntryReport,
    pub configs: Vec<EntryReport>,
}

impl TechniqueReport {
    pub fn entries(&self) -> impl Iterator<Item = &EntryReport> + '_ {
        std::iter::once(&self.baseline).chain(&self.configs)
    }

    pub fn entry(&self, config: &str) -> Option<&EntryReport> {
        self.entries().find(|e| e.config == config)
    }

    /// Best configuration by Hits@10, then Hits@5, then Hits@1; earlier grid
    /// order wins remaining ties.
    pub fn best_config(&self) -> Option<&EntryReport> {
        let key = |e: &EntryReport| {
            let h = |k| e.hits_at(k).map_or(0, |h| h.hits);
            (h(10), h(5), h(1))
        };
        let mut best: Option<&EntryReport> = None;
        for e in &self.configs {
            if best.is_none_or(|b| key(e) > key(b)) {
                best = Some(e);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub techniques: Vec<TechniqueReport>,
    pub excluded: Vec<Exclusion>,
    /// Rankable corpus size per evaluated bug; unranked files count as size + 1.
    pub corpus_sizes: BTreeMap<String, usize>,
    /// GUI mapping diagnostics per bug, keyed by `s<k>/<info>`.
    pub mapping: BTreeMap<String, BTreeMap<String, MappingDiagnostics>>,
}

impl RunReport {
    pub fn technique(&self, t: Technique) -> Option<&TechniqueReport> {
        self.techniques.iter().find(|r| r.technique == t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One row per (technique, configuration), baseline first.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for ex in &self.excluded {
            let _ = writeln!(out, "# excluded {}: {}", ex.bug_id, ex.reason.replace('\n', " "));
        }
        out.push_str(
            "technique,config,hits_at_1,hits_at_5,hits_at_10,hit_count_1,hit_count_5,hit_count_10,bugs,rel_improvement_at_10\n",
        );
        for t in &self.techniques {
            for e in t.entries() {
                let h = |k| e.hits_at(k).copied().unwrap_or(HitsAtK { k, hits: 0, total: 0, fraction: 0.0 });
                let (h1, h5, h10) = (h(1), h(5), h(10));
                let rel = e.rel_improvement_at_10.map(|r| r.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    t.technique, e.config, h1.fraction, h5.fraction, h10.fraction, h1.hits, h5.hits, h10.hits, h10.total, rel
                );
            }
        }
        out
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let csv = out_dir.join("report.csv");
        std::fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        let json = out_dir.join("report.json");
        std::fs::write(&json, self.to_json()).map_err(|e| Error::io(&json, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAnalysis {
    pub technique: Technique,
    pub base_config: String,
    pub aug_config: String,
    pub hits_at_10_base: f64,
    pub hits_at_10_aug: f64,
    pub movement: MovementReport,
    pub wilcoxon: WilcoxonResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapCell {
    pub techniques: Vec<String>,
    pub bugs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub pairs: Vec<PairAnalysis>,
    /// Top-10 overlap across the techniques' baselines in the augmented report.
    pub baseline_overlap: Vec<OverlapCell>,
    /// Top-10 overlap across each technique's best configuration.
    pub best_config_overlap: Vec<OverlapCell>,
    pub best_configs: BTreeMap<String, String>,
}

pub fn overlap_cells(table: &OverlapTable) -> Vec<OverlapCell> {
    table
        .iter()
        .map(|(k, v)| OverlapCell {
            techniques: k.iter().cloned().collect(),
            bugs: *v,
        })
        .collect()
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("analysis serializes") + "\n"
    }
}
