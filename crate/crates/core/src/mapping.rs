//! Resolving GUI terms to GUI-related source files.
//!
//! Screen names match `.java` files by file stem. Resource ids match `.java`
//! files that reference them, by default through a lexical scan for
//! `R.id.<id>` or the literal `"id/<id>"`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DocKind, SourceDocument};
pub use crate::scenario::simple_class_name;
use crate::scenario::{extract_terms, select_screens, GuiInfoType, ReproductionScenario};

/// Set of rankable corpus paths.
pub type FileSet = BTreeSet<String>;

/// Decides which resource ids a source file references.
pub trait ReferenceMatcher: Sync {
    fn referenced_ids(&self, doc: &SourceDocument) -> BTreeSet<String>;
}

/// Whole-file lexical matching of `R.id.<id>` and `"id/<id>"`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalMatcher;

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

impl ReferenceMatcher for LexicalMatcher {
    fn referenced_ids(&self, doc: &SourceDocument) -> BTreeSet<String> {
        let text = doc.raw_text.as_bytes();
        let mut ids = BTreeSet::new();
        let mut from = 0;
        while let Some(off) = doc.raw_text[from..].find("R.id.") {
            let at = from + off;
            let start = at + "R.id.".len();
            // `R` must not be the tail of a longer identifier (e.g. `FooR.id`).
            let clean_prefix = at == 0 || !is_ident_byte(text[at - 1]);
            let end = start + text[start..].iter().take_while(|b| is_ident_byte(**b)).count();
            if clean_prefix && end > start {
                ids.insert(doc.raw_text[start..end].to_string());
            }
            from = start;
        }
        from = 0;
        while let Some(off) = doc.raw_text[from..].find("\"id/") {
            let start = from + off + "\"id/".len();
            let end = start + text[start..].iter().take_while(|b| is_ident_byte(**b)).count();
            if end > start && text.get(end) == Some(&b'"') {
                ids.insert(doc.raw_text[start..end].to_string());
            }
            from = start;
        }
        ids
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingDiagnostics {
    pub unmatched_screen_terms: BTreeSet<String>,
    pub unmatched_component_ids: BTreeSet<String>,
    /// Files matched per term (screen names and resource ids share one map).
    pub match_counts: BTreeMap<String, usize>,
}

/// Precomputed lookup tables over one corpus.
#[derive(Debug, Clone)]
pub struct GuiMapper<'a> {
    corpus: &'a Corpus,
    by_stem: BTreeMap<String, FileSet>,
    by_id: BTreeMap<String, FileSet>,
}

impl<'a> GuiMapper<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        Self::with_matcher(corpus, &LexicalMatcher)
    }

    pub fn with_matcher(corpus: &'a Corpus, matcher: &dyn ReferenceMatcher) -> Self {
        let mut by_stem: BTreeMap<String, FileSet> = BTreeMap::new();
        let mut by_id: BTreeMap<String, FileSet> = BTreeMap::new();
        for doc in corpus.rankable() {
            debug_assert_eq!(doc.kind, DocKind::Java);
            by_stem
                .entry(doc.stem().to_string())
                .or_default()
                .insert(doc.path.clone());
            for id in matcher.referenced_ids(doc) {
                by_id.entry(id).or_default().insert(doc.path.clone());
            }
        }
        Self {
            corpus,
            by_stem,
            by_id,
        }
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn map_screen_terms<'t>(
        &self,
        terms: impl IntoIterator<Item = &'t String>,
        diag: &mut MappingDiagnostics,
    ) -> FileSet {
        let mut out = FileSet::new();
        for term in terms {
            let files = self.by_stem.get(simple_class_name(term));
            let n = files.map_or(0, BTreeSet::len);
            diag.match_counts.insert(term.clone(), n);
            match files {
                Some(files) => out.extend(files.iter().cloned()),
                None => {
                    diag.unmatched_screen_terms.insert(term.clone());
                }
            }
        }
        out
    }

    pub fn map_component_ids<'t>(
        &self,
        ids: impl IntoIterator<Item = &'t String>,
        diag: &mut MappingDiagnostics,
    ) -> FileSet {
        let mut out = FileSet::new();
        for id in ids {
            let files = self.by_id.get(id);
            diag.match_counts.insert(id.clone(), files.map_or(0, BTreeSet::len));
            match files {
                Some(files) => out.extend(files.iter().cloned()),
                None => {
                    diag.unmatched_component_ids.insert(id.clone());
                }
            }
        }
        out
    }

    /// Screen selection, term extraction and mapping for one information type.
    pub fn gui_related_files(
        &self,
        scenario: &ReproductionScenario,
        info: GuiInfoType,
        n_screens: usize,
    ) -> (FileSet, MappingDiagnostics) {
        let terms = extract_terms(select_screens(scenario, n_screens), info);
        let mut diag = MappingDiagnostics::default();
        let mut files = self.map_screen_terms(&terms.screen_terms, &mut diag);
        files.extend(self.map_component_ids(&terms.component_ids, &mut diag));
        (files, diag)
    }
}

pub fn map_screen_terms(terms: &BTreeSet<String>, corpus: &Corpus) -> FileSet {
    GuiMapper::new(corpus).map_screen_terms(terms, &mut MappingDiagnostics::default())
}

pub fn map_component_ids(ids: &BTreeSet<String>, corpus: &Corpus) -> FileSet {
    GuiMapper::new(corpus).map_component_ids(ids, &mut MappingDiagnostics::default())
}

pub fn gui_related_files(
    scenario: &ReproductionScenario,
    corpus: &Corpus,
    info: GuiInfoType,
    n_screens: usize,
) -> FileSet {
    GuiMapper::new(corpus).gui_related_files(scenario, info, n_screens).0
}
