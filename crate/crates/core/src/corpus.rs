//! Source corpus loading.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::warn;
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::preprocess::{preprocess_text, TokenList};

pub const DEFAULT_INCLUDE_GLOBS: [&str; 2] = ["**/*.java", "**/*.xml"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocKind {
    Java,
    Xml,
    Other,
}

impl DocKind {
    pub fn from_path(path: &str) -> Self {
        match path.rsplit_once('.').map(|(_, ext)| ext) {
            Some("java") => DocKind::Java,
            Some("xml") => DocKind::Xml,
            _ => DocKind::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    /// Forward-slash path relative to the corpus root.
    pub path: String,
    pub kind: DocKind,
    pub raw_text: String,
    pub tokens: TokenList,
}

impl SourceDocument {
    pub fn new(path: impl Into<String>, raw_text: impl Into<String>) -> Self {
        let path = path.into();
        let raw_text = raw_text.into();
        Self {
            kind: DocKind::from_path(&path),
            tokens: preprocess_text(&raw_text),
            path,
            raw_text,
        }
    }

    /// File name without directory and extension.
    pub fn stem(&self) -> &str {
        let name = self.path.rsplit('/').next().unwrap_or(&self.path);
        name.rsplit_once('.').map_or(name, |(stem, _)| stem)
    }
}

/// A non-fatal problem met while loading a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadWarning {
    pub path: String,
    pub message: String,
}

/// Immutable set of documents for one app, sorted by path.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub app_id: String,
    documents: Vec<SourceDocument>,
    rankable: Vec<usize>,
}

impl Corpus {
    /// Builds a corpus from in-memory documents. Paths must be unique.
    pub fn from_documents(app_id: impl Into<String>, mut documents: Vec<SourceDocument>) -> Result<Self> {
        documents.sort_by(|a, b| a.path.cmp(&b.path));
        if let Some(w) = documents.windows(2).find(|w| w[0].path == w[1].path) {
            return Err(Error::Manifest(format!("duplicate corpus path {}", w[0].path)));
        }
        let rankable = documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.kind == DocKind::Java)
            .map(|(i, _)| i)
            .collect();
        Ok(Self {
            app_id: app_id.into(),
            documents,
            rankable,
        })
    }

    pub fn documents(&self) -> &[SourceDocument] {
        &self.documents
    }

    pub fn rankable(&self) -> impl Iterator<Item = &SourceDocument> + '_ {
        self.rankable.iter().map(move |&i| &self.documents[i])
    }

    pub fn rankable_len(&self) -> usize {
        self.rankable.len()
    }

    pub fn rankable_paths(&self) -> BTreeSet<String> {
        self.rankable().map(|d| d.path.clone()).collect()
    }

    pub fn get(&self, path: &str) -> Option<&SourceDocument> {
        self.documents
            .binary_search_by(|d| d.path.as_str().cmp(path))
            .ok()
            .map(|i| &self.documents[i])
    }

    pub fn is_rankable(&self, path: &str) -> bool {
        self.get(path).is_some_and(|d| d.kind == DocKind::Java)
    }
}

fn build_globset(patterns: &[String]) -> Result<GlobSet> {
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        let glob = Glob::new(p).map_err(|e| Error::Glob {
            pattern: p.clone(),
            message: e.to_string(),
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|e| Error::Glob {
        pattern: patterns.join(","),
        message: e.to_string(),
    })
}

/// Loads every file under `root` matching one of `include_globs`.
///
/// Unreadable files are skipped and reported as warnings. Symlinks are
/// followed, so a link cycle is an error.
pub fn load_corpus(
    app_id: &str,
    root: &Path,
    include_globs: &[String],
) -> Result<(Corpus, Vec<LoadWarning>)> {
    let globs = build_globset(include_globs)?;
    let mut matched: Vec<(String, PathBuf)> = Vec::new();
    for entry in WalkDir::new(root).follow_links(true) {
        let entry = entry.map_err(|e| Error::Walk {
            path: root.to_path_buf(),
            message: e.to_string(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let Ok(rel) = entry.path().strip_prefix(root) else {
            continue;
        };
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if globs.is_match(&rel) {
            matched.push((rel, entry.path().to_path_buf()));
        }
    }
    if matched.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }

    let loaded: Vec<std::result::Result<SourceDocument, LoadWarning>> = matched
        .into_par_iter()
        .map(|(rel, full)| match std::fs::read(&full) {
            Ok(bytes) => Ok(SourceDocument::new(rel, String::from_utf8_lossy(&bytes).into_owned())),
            Err(e) => Err(LoadWarning {
                path: rel,
                message: e.to_string(),
            }),
        })
        .collect();

    let mut documents = Vec::new();
    let mut warnings = Vec::new();
    for item in loaded {
        match item {
            Ok(doc) => documents.push(doc),
            Err(w) => {
                warn!(path = %w.path, "skipping unreadable file: {}", w.message);
                warnings.push(w);
            }
        }
    }
    if documents.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }
    warnings.sort_by(|a, b| a.path.cmp(&b.path));
    Ok((Corpus::from_documents(app_id, documents)?, warnings))
}

pub fn default_globs() -> Vec<String> {
    DEFAULT_INCLUDE_GLOBS.iter().map(|s| s.to_string()).collect()
}
