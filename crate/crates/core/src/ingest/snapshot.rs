//! Offline page snapshots: a manifest `url <TAB> relative_path [<TAB> content_type]`
//! next to the page files.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ingest::document::{DocumentBuilder, FetchStatus, WebDocument};

/// Conventional manifest name inside a snapshot directory.
pub const MANIFEST_FILE: &str = "manifest.tsv";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub url: String,
    pub path: PathBuf,
    pub content_type: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotManifest {
    pub entries: Vec<ManifestEntry>,
    root: PathBuf,
}

impl SnapshotManifest {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        SnapshotManifest {
            entries: Vec::new(),
            root: root.into(),
        }
    }

    /// Parses a manifest, checking URL uniqueness and that every file exists.
    pub fn read(manifest_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
        let root = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let mut seen = HashSet::new();
        let mut manifest = SnapshotManifest::new(root);
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let (url, rel, ct) = match cols[..] {
                [u, p] => (u, p, None),
                [u, p, c] => (u, p, Some(c.to_string())),
                _ => {
                    return Err(Error::format(
                        manifest_path,
                        idx + 1,
                        format!("expected 2 or 3 columns, found {}", cols.len()),
                    ))
                }
            };
            if !seen.insert(url.to_string()) {
                return Err(Error::Snapshot {
                    url: url.to_string(),
                    message: format!("duplicate URL at line {}", idx + 1),
                });
            }
            let entry = ManifestEntry {
                url: url.to_string(),
                path: PathBuf::from(rel),
                content_type: ct,
            };
            if !manifest.resolve(&entry).is_file() {
                return Err(Error::Snapshot {
                    url: url.to_string(),
                    message: format!("missing file {}", entry.path.display()),
                });
            }
            manifest.entries.push(entry);
        }
        Ok(manifest)
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.path)
    }

    pub fn write(&self, manifest_path: &Path) -> Result<()> {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.url);
            out.push('\t');
            out.push_str(&e.path.to_string_lossy());
            if let Some(ct) = &e.content_type {
                out.push('\t');
                out.push_str(ct);
            }
            out.push('\n');
        }
        fs::write(manifest_path, out).map_err(|e| Error::io(manifest_path, e))
    }
}

/// Loads every page of a snapshot, in manifest order.
pub fn load_snapshot(manifest_path: &Path, builder: &DocumentBuilder) -> Result<Vec<WebDocument>> {
    let manifest = SnapshotManifest::read(manifest_path)?;
    manifest
        .entries
        .iter()
        .map(|e| {
            let path = manifest.resolve(e);
            let html = fs::read(&path).map_err(|err| Error::Snapshot {
                url: e.url.clone(),
                message: err.to_string(),
            })?;
            Ok(builder.build(&e.url, html, FetchStatus::FromSnapshot))
        })
        .collect()
}
