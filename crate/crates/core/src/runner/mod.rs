//! Dataset loading and the `index`, `run`, `analyze` and `queries` commands.

mod manifest;
mod report;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;
use tracing::{info, warn};

pub use manifest::{BugDescriptor, DatasetManifest};
pub use report::{
    AnalysisReport, EntryReport, Exclusion, OverlapCell, PairAnalysis, RunReport, TechniqueReport, BASELINE,
    HIT_KS,
};

use crate::augment::{
    apply_config, enumerate_configs, BugContext, Configuration, ReformMethod, SCREEN_COUNTS,
};
use crate::corpus::{load_corpus, Corpus};
use crate::error::{Error, Result};
use crate::eval::{movement_from_ranks, relative_improvement, top10_overlap, wilcoxon_signed_rank, Alternative, FirstRank};
use crate::mapping::{GuiMapper, MappingDiagnostics};
use crate::preprocess::{preprocess_text, TokenList};
use crate::retrieval::{
    build_index, EmbeddingRanker, EmbeddingStore, Index, Query, RankedList, Ranker, RvsmRanker, Technique,
    TfidfRanker,
};
use crate::scenario::{parse_scenario_as, GuiInfoType, ReproductionScenario};

pub struct AppData {
    pub corpus: Corpus,
    pub index: Index,
}

pub struct LoadedBug {
    pub bug_id: String,
    pub app_id: String,
    pub report_tokens: TokenList,
    pub scenario: ReproductionScenario,
    pub truth: BTreeSet<String>,
    pub embedding_store: Option<PathBuf>,
}

/// Everything needed to evaluate a manifest, minus the bugs that failed to load.
pub struct Dataset {
    pub apps: BTreeMap<String, AppData>,
    pub bugs: Vec<LoadedBug>,
    pub excluded: Vec<Exclusion>,
}

fn index_file(dir: &Path, app_id: &str) -> PathBuf {
    dir.join(format!("{app_id}.index.json"))
}

fn exclude(excluded: &mut Vec<Exclusion>, bug_id: &str, reason: impl Into<String>) {
    let reason = reason.into();
    warn!(bug = bug_id, "excluding bug: {reason}");
    excluded.push(Exclusion {
        bug_id: bug_id.to_string(),
        reason,
    });
}

fn load_app(manifest: &DatasetManifest, bug: &BugDescriptor, index_dir: Option<&Path>) -> Result<AppData> {
    let root = manifest.resolve(&bug.corpus_root);
    let (corpus, warnings) = load_corpus(&bug.app_id, &root, &manifest.include_globs)?;
    for w in warnings {
        warn!(app = %bug.app_id, path = %w.path, "{}", w.message);
    }
    let persisted = index_dir
        .map(|d| index_file(d, &bug.app_id))
        .filter(|p| p.is_file());
    let index = match persisted {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            serde_json::from_str(&text).map_err(|source| Error::Json { path, source })?
        }
        None => build_index(&corpus)?,
    };
    Ok(AppData { corpus, index })
}

impl Dataset {
    pub fn load(manifest: &DatasetManifest, index_dir: Option<&Path>) -> Self {
        let mut excluded = Vec::new();
        let mut apps: BTreeMap<String, AppData> = BTreeMap::new();
        let mut failed_apps: BTreeMap<String, String> = BTreeMap::new();
        let mut bugs = Vec::new();

        for bug in &manifest.bugs {
            let missing = manifest.missing_paths(bug);
            if !missing.is_empty() {
                let list: Vec<String> = missing.iter().map(|p| p.display().to_string()).collect();
                exclude(&mut excluded, &bug.bug_id, format!("missing paths: {}", list.join(", ")));
                continue;
            }
            if !apps.contains_key(&bug.app_id) && !failed_apps.contains_key(&bug.app_id) {
                match load_app(manifest, bug, index_dir) {
                    Ok(app) => {
                        apps.insert(bug.app_id.clone(), app);
                    }
                    Err(e) => {
                        failed_apps.insert(bug.app_id.clone(), e.to_string());
                    }
                }
            }
            if let Some(reason) = failed_apps.get(&bug.app_id) {
                exclude(&mut excluded, &bug.bug_id, format!("corpus: {reason}"));
                continue;
            }
            let app = &apps[&bug.app_id];

            let report_path = manifest.resolve(&bug.report_path);
            let report = match std::fs::read_to_string(&report_path) {
                Ok(r) => r,
                Err(e) => {
                    exclude(&mut excluded, &bug.bug_id, format!("report: {e}"));
                    continue;
                }
            };
            let scenario = match parse_scenario_as(&manifest.resolve(&bug.scenario_dir), &bug.bug_id) {
                Ok(s) => s,
                Err(e) => {
                    exclude(&mut excluded, &bug.bug_id, e.to_string());
                    continue;
                }
            };
            let truth: BTreeSet<String> = bug.truth_paths.iter().cloned().collect();
            let unknown: Vec<&String> = truth.iter().filter(|p| !app.corpus.is_rankable(p)).collect();
            if !unknown.is_empty() {
                let list: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
                exclude(
                    &mut excluded,
                    &bug.bug_id,
                    format!("truth paths not rankable in corpus: {}", list.join(", ")),
                );
                continue;
            }
            bugs.push(LoadedBug {
                bug_id: bug.bug_id.clone(),
                app_id: bug.app_id.clone(),
                report_tokens: preprocess_text(&report),
                scenario,
                truth,
                embedding_store: bug.embedding_store_path.as_deref().map(|p| manifest.resolve(p)),
            });
        }
        Self { apps, bugs, excluded }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IndexSummary {
    pub written: Vec<PathBuf>,
    pub errors: Vec<Exclusion>,
}

/// Builds and persists one index per app. Failing apps are recorded and skipped.
pub fn cmd_index(manifest: &DatasetManifest, out_dir: &Path) -> Result<IndexSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut by_app: BTreeMap<&str, Vec<&BugDescriptor>> = BTreeMap::new();
    for bug in &manifest.bugs {
        by_app.entry(&bug.app_id).or_default().push(bug);
    }
    let mut summary = IndexSummary::default();
    for (app_id, bugs) in by_app {
        let root = manifest.resolve(&bugs[0].corpus_root);
        let built = load_corpus(app_id, &root, &manifest.include_globs).and_then(|(c, _)| build_index(&c));
        match built {
            Ok(index) => {
                let path = index_file(out_dir, app_id);
                let json = serde_json::to_string(&index).expect("index serializes");
                std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
                info!(app = app_id, docs = index.n_docs(), "wrote index");
                summary.written.push(path);
            }
            Err(e) => {
                for bug in bugs {
                    exclude(&mut summary.errors, &bug.bug_id, e.to_string());
                }
            }
        }
    }
    let errors_path = out_dir.join("index_errors.json");
    let json = serde_json::to_string_pretty(&summary.errors).expect("errors serialize") + "\n";
    std::fs::write(&errors_path, json).map_err(|e| Error::io(&errors_path, e))?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigSelection {
    All,
    /// Baselines only.
    None,
    List(Vec<Configuration>),
}

impl ConfigSelection {
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim() {
            "all" => Ok(ConfigSelection::All),
            "none" | "baseline" => Ok(ConfigSelection::None),
            list => list
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<Vec<_>>>()
                .map(ConfigSelection::List),
        }
    }

    pub fn configs(&self) -> Vec<Configuration> {
        match self {
            ConfigSelection::All => enumerate_configs(),
            ConfigSelection::None => Vec::new(),
            ConfigSelection::List(list) => list.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub techniques: Vec<Technique>,
    pub configs: ConfigSelection,
    pub index_dir: Option<PathBuf>,
}

/// Memoizes rankings by query key; many configurations share a query.
struct CachingRanker<'a> {
    inner: &'a dyn Ranker,
    cache: Mutex<HashMap<String, RankedList>>,
}

impl Ranker for CachingRanker<'_> {
    fn rank(&self, query: &Query) -> Result<RankedList> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&query.key) {
            return Ok(hit.clone());
        }
        let ranked = self.inner.rank(query)?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(query.key.clone(), ranked.clone());
        Ok(ranked)
    }
}

struct BugOutcome {
    baseline: FirstRank,
    configs: Vec<(FirstRank, bool)>,
}

fn evaluate_bug(
    ranker: &dyn Ranker,
    bug: &LoadedBug,
    mapper: &GuiMapper<'_>,
    configs: &[Configuration],
) -> Result<BugOutcome> {
    let ranker = CachingRanker {
        inner: ranker,
        cache: Mutex::new(HashMap::new()),
    };
    let ctx = BugContext {
        bug_id: &bug.bug_id,
        report_tokens: &bug.report_tokens,
        scenario: &bug.scenario,
        mapper,
    };
    let baseline = ranker.rank(&ctx.baseline_query())?.first_rank(&bug.truth);
    let configs = configs
        .iter()
        .map(|cfg| {
            let out = apply_config(&ranker, cfg, &ctx)?;
            Ok((out.ranked.first_rank(&bug.truth), out.filter_skipped))
        })
        .collect::<Result<_>>()?;
    Ok(BugOutcome { baseline, configs })
}

fn mapping_diagnostics(bug: &LoadedBug, mapper: &GuiMapper<'_>) -> BTreeMap<String, MappingDiagnostics> {
    let mut out = BTreeMap::new();
    for n in SCREEN_COUNTS {
        for info in GuiInfoType::ALL {
            let (_, diag) = mapper.gui_related_files(&bug.scenario, info, n as usize);
            out.insert(format!("s{n}/{info}"), diag);
        }
    }
    out
}

/// Evaluates the baseline and every selected configuration for each technique.
pub fn cmd_run(manifest: &DatasetManifest, opts: &RunOptions) -> Result<RunReport> {
    if opts.techniques.is_empty() {
        return Err(Error::Config("no techniques selected".into()));
    }
    let data = Dataset::load(manifest, opts.index_dir.as_deref());
    let configs = opts.configs.configs();

    let mut stores: BTreeMap<PathBuf, EmbeddingStore> = BTreeMap::new();
    if opts.techniques.contains(&Technique::Embed) {
        let missing: Vec<&str> = data
            .bugs
            .iter()
            .filter(|b| b.embedding_store.is_none())
            .map(|b| b.bug_id.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Manifest(format!(
                "embed requires embedding stores; missing for: {}",
                missing.join(", ")
            )));
        }
        for path in data.bugs.iter().filter_map(|b| b.embedding_store.as_ref()) {
            if !stores.contains_key(path) {
                stores.insert(path.clone(), EmbeddingStore::load(path)?);
            }
        }
    }

    let mappers: BTreeMap<&str, GuiMapper<'_>> = data
        .apps
        .iter()
        .map(|(id, app)| (id.as_str(), GuiMapper::new(&app.corpus)))
        .collect();

    let mut techniques = Vec::new();
    for &technique in &opts.techniques {
        let outcomes: Vec<Result<BugOutcome>> = data
            .bugs
            .par_iter()
            .map(|bug| {
                let app = &data.apps[&bug.app_id];
                let mapper = &mappers[bug.app_id.as_str()];
                match technique {
                    Technique::Tfidf => evaluate_bug(&TfidfRanker(&app.index), bug, mapper, &configs),
                    Technique::Rvsm => evaluate_bug(&RvsmRanker(&app.index), bug, mapper, &configs),
                    Technique::Embed => {
                        let store = &stores[bug.embedding_store.as_ref().expect("checked above")];
                        let ranker = EmbeddingRanker {
                            store,
                            paths: app.corpus.rankable_paths().into_iter().collect(),
                        };
                        evaluate_bug(&ranker, bug, mapper, &configs)
                    }
                }
                .map_err(|e| Error::Eval(format!("{technique} on bug {}: {e}", bug.bug_id)))
            })
            .collect();
        let outcomes: Vec<BugOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

        let ids = || data.bugs.iter().map(|b| b.bug_id.clone());
        let baseline = EntryReport::new(
            BASELINE.to_string(),
            ids().zip(outcomes.iter().map(|o| o.baseline)).collect(),
            Vec::new(),
        );
        // Hit counts share one denominator, so their ratio avoids fraction rounding.
        let base_h10 = baseline.hits_at(10).map_or(0.0, |h| h.hits as f64);
        let entries = configs
            .iter()
            .enumerate()
            .map(|(ci, cfg)| {
                let ranks = ids().zip(outcomes.iter().map(|o| o.configs[ci].0)).collect();
                let skipped = ids()
                    .zip(&outcomes)
                    .filter(|(_, o)| o.configs[ci].1)
                    .map(|(id, _)| id)
                    .collect();
                let mut entry = EntryReport::new(cfg.to_string(), ranks, skipped);
                entry.rel_improvement_at_10 =
                    relative_improvement(entry.hits_at(10).map_or(0.0, |h| h.hits as f64), base_h10);
                entry
            })
            .collect();
        techniques.push(TechniqueReport {
            technique,
            baseline,
            configs: entries,
        });
    }

    let corpus_sizes = data
        .bugs
        .iter()
        .map(|b| (b.bug_id.clone(), data.apps[&b.app_id].corpus.rankable_len()))
        .collect();
    let mapping = data
        .bugs
        .iter()
        .map(|b| (b.bug_id.clone(), mapping_diagnostics(b, &mappers[b.app_id.as_str()])))
        .collect();
    Ok(RunReport {
        techniques,
        excluded: data.excluded,
        corpus_sizes,
        mapping,
    })
}

fn ranks_with_sentinel(ranks: &BTreeMap<String, FirstRank>, sizes: &BTreeMap<String, usize>) -> Result<Vec<f64>> {
    ranks
        .iter()
        .map(|(bug, r)| {
            let size = sizes
                .get(bug)
                .ok_or_else(|| Error::Eval(format!("no corpus size recorded for bug {bug}")))?;
            Ok(r.unwrap_or(size + 1) as f64)
        })
        .collect()
}

fn hit_bugs(entry: &EntryReport) -> BTreeSet<String> {
    entry
        .first_ranks
        .iter()
        .filter(|(_, r)| r.is_some_and(|r| r <= 10))
        .map(|(b, _)| b.clone())
        .collect()
}

/// Compares the baseline of `base` against every entry of `aug`, per technique.
pub fn cmd_analyze(base: &RunReport, aug: &RunReport, alternative: Alternative) -> Result<AnalysisReport> {
    let mut pairs = Vec::new();
    for aug_t in &aug.techniques {
        let Some(base_t) = base.technique(aug_t.technique) else {
            continue;
        };
        let b = &base_t.baseline;
        let base_ranks = ranks_with_sentinel(&b.first_ranks, &base.corpus_sizes)?;
        for a in aug_t.entries() {
            if b.first_ranks.keys().ne(a.first_ranks.keys()) {
                return Err(Error::Eval(format!(
                    "{}: bug sets differ between reports",
                    aug_t.technique
                )));
            }
            let aug_ranks = ranks_with_sentinel(&a.first_ranks, &aug.corpus_sizes)?;
            pairs.push(PairAnalysis {
                technique: aug_t.technique,
                base_config: b.config.clone(),
                aug_config: a.config.clone(),
                hits_at_10_base: b.hits_at(10).map_or(0.0, |h| h.fraction),
                hits_at_10_aug: a.hits_at(10).map_or(0.0, |h| h.fraction),
                movement: movement_from_ranks(&b.first_ranks, &a.first_ranks)?,
                wilcoxon: wilcoxon_signed_rank(&base_ranks, &aug_ranks, alternative)?,
            });
        }
    }
    if pairs.is_empty() {
        return Err(Error::Eval("reports share no technique".into()));
    }

    let baseline_hits: BTreeMap<String, BTreeSet<String>> = aug
        .techniques
        .iter()
        .map(|t| (t.technique.to_string(), hit_bugs(&t.baseline)))
        .collect();
    let mut best_configs = BTreeMap::new();
    let mut best_hits = BTreeMap::new();
    for t in &aug.techniques {
        if let Some(best) = t.best_config() {
            best_configs.insert(t.technique.to_string(), best.config.clone());
            best_hits.insert(t.technique.to_string(), hit_bugs(best));
        }
    }
    let best_config_overlap = if best_hits.is_empty() {
        Vec::new()
    } else {
        report::overlap_cells(&top10_overlap(&best_hits)?)
    };
    Ok(AnalysisReport {
        pairs,
        baseline_overlap: report::overlap_cells(&top10_overlap(&baseline_hits)?),
        best_config_overlap,
        best_configs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryText {
    pub key: String,
    pub text: String,
}

/// Every query the grid can issue, as preprocessed text. External embedding
/// exporters embed these under the same keys.
pub fn cmd_queries(manifest: &DatasetManifest) -> Result<(Vec<QueryText>, Vec<Exclusion>)> {
    let data = Dataset::load(manifest, None);
    let mut out = Vec::new();
    for bug in &data.bugs {
        let mapper = GuiMapper::new(&data.apps[&bug.app_id].corpus);
        let ctx = BugContext {
            bug_id: &bug.bug_id,
            report_tokens: &bug.report_tokens,
            scenario: &bug.scenario,
            mapper: &mapper,
        };
        let mut queries = vec![ctx.baseline_query()];
        for n in SCREEN_COUNTS {
            for method in [ReformMethod::Expand, ReformMethod::Replace] {
                for info in GuiInfoType::ALL {
                    let cfg = Configuration::new(n, crate::augment::Rerank::None, crate::augment::Reform::Apply(method, info))?;
                    queries.push(ctx.query_for(&cfg));
                }
            }
        }
        out.extend(queries.into_iter().map(|q| QueryText {
            key: q.key,
            text: q.tokens.joined(),
        }));
    }
    Ok((out, data.excluded))
}
