//! Independent oracles and randomized checks shared by the integration tests
//! and the acceptance harness. Every check returns the number of cases it
//! examined, or a description of the first violation.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use guiloc::augment::{boost_ranking, filter_ranking};
use guiloc::corpus::{Corpus, SourceDocument};
use guiloc::eval::{hits_from_ranks, wilcoxon_signed_rank, Alternative, FirstRank};
use guiloc::mapping::{gui_related_files, FileSet};
use guiloc::preprocess::TokenList;
use guiloc::retrieval::{build_index, rank_rvsm, rank_tfidf, RankedEntry, RankedList};
use guiloc::scenario::{
    Action, Bounds, ComponentMeta, ExercisedAction, GuiInfoType, ReproductionScenario, ScreenObservation,
};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_manifest() -> PathBuf {
    fixtures().join("dataset/manifest.json")
}

pub const MARKOR_TRUTH: &str = "app/src/main/java/net/gsantner/markor/ui/NewFileDialog.java";

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<usize, String> {
    runner(cases)
        .run(&strategy, test)
        .map(|()| cases as usize)
        .map_err(|e| e.to_string())
}

// ------------------------------------------------------------ retrieval

pub const VOCAB: [&str; 30] = [
    "apple", "bread", "cable", "delta", "eagle", "fable", "gamma", "hotel", "index", "joker", "karma", "lemon",
    "mango", "noble", "ocean", "piano", "quark", "radar", "salsa", "tango", "ultra", "vivid", "waltz", "xenon",
    "yacht", "zebra", "amber", "birch", "cedar", "dunes",
];

/// Brute-force tf-idf cosine (and rVSM when `rvsm`) of every document.
pub fn brute_scores(docs: &[Vec<usize>], query: &[usize], rvsm: bool) -> Vec<f64> {
    let live: Vec<usize> = (0..docs.len()).filter(|&i| !docs[i].is_empty()).collect();
    let n = live.len() as f64;
    let count = |tokens: &[usize], t: usize| tokens.iter().filter(|&&x| x == t).count() as f64;
    let df = |t: usize| live.iter().filter(|&&i| docs[i].contains(&t)).count() as f64;
    let weight = |tokens: &[usize], t: usize| {
        let tf = count(tokens, t);
        if tf == 0.0 || df(t) == 0.0 {
            0.0
        } else {
            (1.0 + tf.ln()) * (n / df(t)).ln()
        }
    };
    let q: Vec<f64> = (0..VOCAB.len()).map(|t| weight(query, t)).collect();
    let qn = q.iter().map(|w| w * w).sum::<f64>().sqrt();
    let lengths: Vec<f64> = live.iter().map(|&i| docs[i].len() as f64).collect();
    let (lo, hi) = lengths
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| (lo.min(l), hi.max(l)));
    docs.iter()
        .map(|d| {
            if d.is_empty() {
                return 0.0;
            }
            let w: Vec<f64> = (0..VOCAB.len()).map(|t| weight(d, t)).collect();
            let dn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let cos = if qn == 0.0 || dn == 0.0 {
                0.0
            } else {
                q.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / (qn * dn)
            };
            if !rvsm {
                return cos;
            }
            let len = d.len() as f64;
            let norm = if hi == lo { 0.5 } else { (len - lo) / (hi - lo) };
            cos / (1.0 + (-norm).exp())
        })
        .collect()
}

const TIE_EPS: f64 = 1e-12;

/// The ranking agrees with brute-force scores: same documents, scores within
/// 1e-9, non-increasing order, and ascending paths among tied scores.
fn ordering_matches(ranked: &RankedList, paths: &[String], scores: &[f64]) -> Result<(), String> {
    let by_path: BTreeMap<&str, f64> = paths.iter().map(String::as_str).zip(scores.iter().copied()).collect();
    if ranked.len() != paths.len() {
        return Err(format!("ranked {} docs, expected {}", ranked.len(), paths.len()));
    }
    for e in ranked.entries() {
        let want = by_path[e.path.as_str()];
        if (e.score - want).abs() > 1e-9 {
            return Err(format!("{}: score {} vs oracle {want}", e.path, e.score));
        }
    }
    for w in ranked.entries().windows(2) {
        let (a, b) = (by_path[w[0].path.as_str()], by_path[w[1].path.as_str()]);
        let tied = (a - b).abs() <= TIE_EPS;
        if (!tied && a < b) || (tied && w[0].path > w[1].path) {
            return Err(format!("{} ({a}) ranked above {} ({b})", w[0].path, w[1].path));
        }
    }
    Ok(())
}

pub fn check_retrieval_oracle(cases: u32) -> Result<usize, String> {
    let strategy = (
        prop::collection::vec(prop::collection::vec(0..VOCAB.len(), 0..15), 1..=10),
        prop::collection::vec(0..VOCAB.len(), 0..10),
    );
    run(cases, strategy, |(docs, query)| {
        let paths: Vec<String> = (0..docs.len()).map(|i| format!("d{i}.java")).collect();
        let text = |ts: &[usize]| ts.iter().map(|&t| VOCAB[t]).collect::<Vec<_>>().join(" ");
        let corpus = Corpus::from_documents(
            "r",
            paths.iter().zip(&docs).map(|(p, d)| SourceDocument::new(p.clone(), text(d))).collect(),
        )
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let index = match build_index(&corpus) {
            Ok(i) => i,
            Err(_) if docs.iter().all(Vec::is_empty) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let q = TokenList::new(query.iter().map(|&t| VOCAB[t].to_string()).collect());
        ordering_matches(&rank_tfidf(&index, "q", &q), &paths, &brute_scores(&docs, &query, false))
            .map_err(|e| TestCaseError::fail(format!("tfidf: {e}")))?;
        ordering_matches(&rank_rvsm(&index, "q", &q), &paths, &brute_scores(&docs, &query, true))
            .map_err(|e| TestCaseError::fail(format!("rvsm: {e}")))?;
        Ok(())
    })
}

// ------------------------------------------------------------ re-ranking

fn ranked_list(order: &[usize]) -> RankedList {
    let n = order.len();
    RankedList::from_ordered(
        "q",
        order
            .iter()
            .enumerate()
            .map(|(i, &p)| RankedEntry {
                path: format!("f{p:02}"),
                score: (n - i) as f64,
            })
            .collect(),
    )
}

fn paths(list: &RankedList) -> Vec<String> {
    list.paths().map(str::to_string).collect()
}

pub fn check_rerank_properties(cases: u32) -> Result<usize, String> {
    let strategy = (
        Just((0..40usize).collect::<Vec<_>>()).prop_shuffle(),
        0..40usize,
        prop::collection::btree_set(0..50usize, 0..30),
        prop::collection::vec(prop::option::of(1..60usize), 0..30),
    );
    run(cases, strategy, |(perm, len, keep, ranks)| {
        let list = ranked_list(&perm[..len]);
        let set: FileSet = keep.iter().map(|p| format!("f{p:02}")).collect();
        let original = paths(&list);
        let inside: Vec<String> = original.iter().filter(|p| set.contains(*p)).cloned().collect();
        let outside: Vec<String> = original.iter().filter(|p| !set.contains(*p)).cloned().collect();

        let boosted = boost_ranking(&list, &set);
        let expected: Vec<String> = inside.iter().chain(&outside).cloned().collect();
        prop_assert_eq!(paths(&boosted), expected, "boost: permutation with boosted prefix");
        prop_assert_eq!(&boost_ranking(&boosted, &set), &boosted, "boost idempotent");

        let filtered = filter_ranking(&list, &set);
        prop_assert_eq!(paths(&filtered), inside, "filter: order-preserving subset");
        prop_assert_eq!(&filter_ranking(&filtered, &set), &filtered, "filter idempotent");
        for e in filtered.entries().iter().chain(boosted.entries()) {
            let before = list.entries().iter().find(|x| x.path == e.path).unwrap();
            prop_assert_eq!(before.score, e.score, "scores are carried over");
        }

        let first: Vec<FirstRank> = ranks;
        let mut prev = 0;
        for k in 1..=61 {
            let h = hits_from_ranks(&first, k);
            let brute = first.iter().filter(|r| matches!(r, Some(r) if *r <= k)).count();
            prop_assert_eq!(h.hits, brute);
            prop_assert!(h.hits >= prev, "Hits@K monotone in K");
            prev = h.hits;
        }
        Ok(())
    })
}

// ------------------------------------------------------------ mapping

const CLASS_POOL: [&str; 12] = [
    "MainActivity", "SettingsActivity", "EditorActivity", "ViewerFragment", "ShareDialog", "SearchView",
    "AboutActivity", "LoginActivity", "ListAdapter", "ToolbarHelper", "NoteStore", "SyncTask",
];

/// (activity index, window index, components (id, interactive), action (kind, pick))
pub type ScreenSpec = (usize, Option<usize>, Vec<(Option<usize>, bool)>, Option<(u8, usize)>);

#[derive(Debug, Clone)]
pub struct MappingCase {
    /// (class index, referenced id indices, use literal form)
    pub files: Vec<(usize, Vec<usize>, bool)>,
    pub screens: Vec<ScreenSpec>,
}

fn id_name(i: usize) -> String {
    format!("widget_{}", ["alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "theta", "zeta", "rho"][i])
}

pub fn mapping_case() -> impl Strategy<Value = MappingCase> {
    let file = (0..CLASS_POOL.len(), prop::collection::vec(0..10usize, 0..4), any::<bool>());
    let screen = (
        0..CLASS_POOL.len() + 3,
        prop::option::of(0..CLASS_POOL.len() + 3),
        prop::collection::vec((prop::option::of(0..10usize), any::<bool>()), 0..6),
        prop::option::of((0..5u8, any::<usize>())),
    );
    (
        prop::collection::vec(file, 1..10),
        prop::collection::vec(screen, 1..6),
    )
        .prop_map(|(files, screens)| MappingCase { files, screens })
}

fn class_name(i: usize) -> String {
    CLASS_POOL.get(i).map_or_else(|| format!("Missing{i}Activity"), |s| s.to_string())
}

impl MappingCase {
    pub fn corpus(&self) -> Corpus {
        let mut seen = BTreeSet::new();
        let docs = self
            .files
            .iter()
            .filter(|(c, _, _)| seen.insert(*c))
            .map(|(c, ids, literal)| {
                let mut body = format!("public class {} {{\n", CLASS_POOL[*c]);
                for &id in ids {
                    if *literal {
                        body += &format!("  int x = res.getIdentifier(\"id/{}\");\n", id_name(id));
                    } else {
                        body += &format!("  View v = findViewById(R.id.{});\n", id_name(id));
                    }
                }
                body += "  // BarR.id.widget_zeta is not a reference\n}\n";
                SourceDocument::new(format!("src/{}.java", CLASS_POOL[*c]), body)
            })
            .collect();
        Corpus::from_documents("m", docs).expect("unique paths")
    }

    pub fn scenario(&self) -> ReproductionScenario {
        let screens = self
            .screens
            .iter()
            .enumerate()
            .map(|(step, (act, win, comps, action))| {
                let components: Vec<ComponentMeta> = comps
                    .iter()
                    .enumerate()
                    .map(|(k, (id, interactive))| ComponentMeta {
                        resource_id: id.map(id_name),
                        class_name: "android.widget.Button".into(),
                        interactive: *interactive,
                        bounds: Bounds {
                            left: 0,
                            top: 10 * k as i32,
                            right: 10,
                            bottom: 10 * k as i32 + 10,
                        },
                    })
                    .collect();
                let with_id: Vec<&String> = components.iter().filter_map(|c| c.resource_id.as_ref()).collect();
                let exercised = action.and_then(|(kind, pick)| {
                    let kind = [Action::Tap, Action::LongTouch, Action::Swipe, Action::TypeText, Action::Back][kind as usize];
                    if kind == Action::Back || with_id.is_empty() {
                        return Some(ExercisedAction {
                            action: kind,
                            resource_id: None,
                        });
                    }
                    Some(ExercisedAction {
                        action: kind,
                        resource_id: Some(with_id[pick % with_id.len()].clone()),
                    })
                });
                ScreenObservation {
                    step_index: step as u32 + 1,
                    activity: format!("org.example.app.{}", class_name(*act)),
                    window: win.map(class_name),
                    components,
                    exercised,
                }
            })
            .collect();
        ReproductionScenario {
            bug_id: "m".into(),
            screens,
        }
    }

    /// Expected GUI-related files computed directly from the generator's
    /// inputs, without going through the scenario or corpus types.
    pub fn expected(&self, info: GuiInfoType, n: usize) -> FileSet {
        let take = n.min(self.screens.len());
        let screens = &self.screens[self.screens.len() - take..];
        let uses_gs = matches!(info, GuiInfoType::GS | GuiInfoType::GS_EGC | GuiInfoType::GS_SC);
        let mut names = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for (act, win, comps, action) in screens {
            if uses_gs {
                names.insert(class_name(*act));
                names.extend(win.map(class_name));
            }
            let with_id: Vec<usize> = comps.iter().filter_map(|(id, _)| *id).collect();
            let exercised = action
                .filter(|(kind, _)| *kind != 4 && !with_id.is_empty())
                .map(|(_, pick)| with_id[pick % with_id.len()]);
            match info {
                GuiInfoType::EGC | GuiInfoType::GS_EGC => ids.extend(exercised),
                GuiInfoType::SC | GuiInfoType::GS_SC => {
                    ids.extend(comps.iter().filter(|(_, i)| *i).filter_map(|(id, _)| *id));
                    ids.extend(exercised);
                }
                GuiInfoType::GS => {}
            }
        }
        let mut out = FileSet::new();
        let mut seen = BTreeSet::new();
        for (c, refs, _) in &self.files {
            if !seen.insert(*c) {
                continue;
            }
            if names.contains(CLASS_POOL[*c]) || refs.iter().any(|r| ids.contains(r)) {
                out.insert(format!("src/{}.java", CLASS_POOL[*c]));
            }
        }
        out
    }
}

pub fn check_mapping_laws(cases: u32) -> Result<usize, String> {
    use GuiInfoType::*;
    run(cases, mapping_case(), |case| {
        let corpus = case.corpus();
        let scenario = case.scenario();
        prop_assert!(scenario.validate().is_ok());
        let files = |info, n| gui_related_files(&scenario, &corpus, info, n);
        for n in 1..=6 {
            for info in GuiInfoType::ALL {
                prop_assert_eq!(files(info, n), case.expected(info, n), "oracle {} n={}", info, n);
                prop_assert!(files(info, n).is_subset(&files(info, n + 1)), "{} monotone in n={}", info, n);
            }
            prop_assert!(files(EGC, n).is_subset(&files(SC, n)), "EGC ⊆ SC at n={}", n);
            let gs_sc: FileSet = files(GS, n).union(&files(SC, n)).cloned().collect();
            prop_assert_eq!(files(GS_SC, n), gs_sc, "GS_SC = GS ∪ SC at n={}", n);
            let gs_egc: FileSet = files(GS, n).union(&files(EGC, n)).cloned().collect();
            prop_assert_eq!(files(GS_EGC, n), gs_egc, "GS_EGC = GS ∪ EGC at n={}", n);
        }
        Ok(())
    })
}

// ------------------------------------------------------------ Wilcoxon

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteWilcoxon {
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_two_sided: f64,
    pub p_greater: f64,
    pub p_less: f64,
}

/// Enumerates all 2^n sign assignments of the non-zero differences.
pub fn brute_wilcoxon(base: &[f64], aug: &[f64]) -> BruteWilcoxon {
    let d: Vec<f64> = base.iter().zip(aug).map(|(b, a)| b - a).filter(|x| *x != 0.0).collect();
    let n = d.len();
    // Average rank of each |d_i|: 1 + #smaller + (#equal - 1) / 2.
    let rank: Vec<f64> = d
        .iter()
        .map(|x| {
            let smaller = d.iter().filter(|y| y.abs() < x.abs()).count() as f64;
            let equal = d.iter().filter(|y| y.abs() == x.abs()).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect();
    let w_plus: f64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| rank[i]).sum();
    let total: f64 = rank.iter().sum();
    if n == 0 {
        return BruteWilcoxon {
            w_plus: 0.0,
            w_minus: 0.0,
            p_two_sided: 1.0,
            p_greater: 1.0,
            p_less: 1.0,
        };
    }
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u32..1 << n {
        let w: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| rank[i]).sum();
        if w <= w_plus + 1e-9 {
            le += 1;
        }
        if w >= w_plus - 1e-9 {
            ge += 1;
        }
    }
    let all = (1u64 << n) as f64;
    let (lower, upper) = (le as f64 / all, ge as f64 / all);
    BruteWilcoxon {
        w_plus,
        w_minus: total - w_plus,
        p_two_sided: (2.0 * lower.min(upper)).min(1.0),
        p_greater: upper,
        p_less: lower,
    }
}

pub fn check_wilcoxon_exact(cases: u32) -> Result<usize, String> {
    let small = prop::collection::vec((0..6u8, 0..6u8), 1..=8)
        .prop_map(|v| v.into_iter().map(|(a, b)| (a as f64, b as f64)).collect::<Vec<_>>());
    let wide = prop::collection::vec((1..101u32, 1..101u32), 1..=8)
        .prop_map(|v| v.into_iter().map(|(a, b)| (a as f64, b as f64)).collect::<Vec<_>>());
    run(cases, prop_oneof![small, wide], |pairs| {
        let base: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let aug: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let want = brute_wilcoxon(&base, &aug);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
        for (alt, p) in [
            (Alternative::TwoSided, want.p_two_sided),
            (Alternative::Greater, want.p_greater),
            (Alternative::Less, want.p_less),
        ] {
            let got = wilcoxon_signed_rank(&base, &aug, alt).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let stat = match alt {
                Alternative::TwoSided => want.w_plus.min(want.w_minus),
                _ => want.w_plus,
            };
            prop_assert!(close(got.w_plus, want.w_plus), "W+ {} vs {}", got.w_plus, want.w_plus);
            prop_assert!(close(got.w_minus, want.w_minus), "W- {} vs {}", got.w_minus, want.w_minus);
            prop_assert!(close(got.statistic, stat), "{:?} statistic {} vs {}", alt, got.statistic, stat);
            prop_assert!(close(got.p_value, p), "{:?} p {} vs {}", alt, got.p_value, p);
        }
        Ok(())
    })
}
