use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One bug as listed in a dataset manifest. Relative paths resolve against
/// the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BugDescriptor {
    pub bug_id: String,
    /// Identifies one corpus snapshot; bugs sharing it must share `corpus_root`.
    pub app_id: String,
    pub corpus_root: PathBuf,
    /// Plain-text bug report (title and body).
    pub report_path: PathBuf,
    /// Buggy files, relative to `corpus_root` with forward slashes.
    pub truth_paths: Vec<String>,
    pub scenario_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_store_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    #[serde(default = "crate::corpus::default_globs")]
    pub include_globs: Vec<String>,
    pub bugs: Vec<BugDescriptor>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    /// Reads and structurally validates a manifest. File existence is checked
    /// per bug by [`DatasetManifest::missing_paths`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bugs.is_empty() {
            return Err(Error::Manifest("no bugs listed".into()));
        }
        let mut ids = BTreeSet::new();
        let mut roots: BTreeMap<&str, &Path> = BTreeMap::new();
        for bug in &self.bugs {
            if bug.bug_id.is_empty() || bug.bug_id.contains(['#', '/']) {
                return Err(Error::Manifest(format!("invalid bug id `{}`", bug.bug_id)));
            }
            if !ids.insert(&bug.bug_id) {
                return Err(Error::Manifest(format!("duplicate bug id `{}`", bug.bug_id)));
            }
            if bug.app_id.is_empty() || bug.app_id.contains(['/', '\\']) {
                return Err(Error::Manifest(format!("invalid app id `{}`", bug.app_id)));
            }
            if bug.truth_paths.is_empty() {
                return Err(Error::Manifest(format!("bug `{}` has no truth paths", bug.bug_id)));
            }
            let root = roots.entry(&bug.app_id).or_insert(&bug.corpus_root);
            if *root != bug.corpus_root.as_path() {
                return Err(Error::Manifest(format!(
                    "app `{}` is listed with two corpus roots",
                    bug.app_id
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Referenced paths of `bug` that do not exist.
    pub fn missing_paths(&self, bug: &BugDescriptor) -> Vec<PathBuf> {
        let mut paths = vec![
            self.resolve(&bug.corpus_root),
            self.resolve(&bug.report_path),
            self.resolve(&bug.scenario_dir),
        ];
        paths.extend(bug.embedding_store_path.as_deref().map(|p| self.resolve(p)));
        paths.into_iter().filter(|p| !p.exists()).collect()
    }
}
