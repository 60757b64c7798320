//! File names under the output directory and crash-safe writes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use bitext_core::Error;

pub const SEED_DICT: &str = "seed_dict.tsv";
pub const SEED_DICT_REV: &str = "seed_dict_rev.tsv";
pub const PROB_TABLE: &str = "prob_table.tsv";
pub const PROB_TABLE_REV: &str = "prob_table_rev.tsv";
pub const DICT_STATS: &str = "dict_stats.json";
pub const DOCUMENTS: &str = "documents.jsonl";
pub const DOC_PAIRS: &str = "doc_pairs.jsonl";
pub const CRAWLED: &str = "crawled.tsv";
pub const FILTERED_RULES: &str = "B.tsv";
pub const HEURISTIC_REMOVED: &str = "heuristic_removed.tsv";
pub const RULE_REPORT: &str = "rules.json";
pub const NEGATIVES: &str = "negatives.tsv";
pub const FOREST: &str = "forest.model";
pub const ACCEPTED: &str = "C.tsv";
pub const REJECTED: &str = "B_minus_C.tsv";
pub const TIMINGS: &str = "timings.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TEXT: &str = "report.txt";

pub const PARTIAL_SUFFIX: &str = ".partial";

pub fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(PARTIAL_SUFFIX);
    path.with_file_name(name)
}

/// Runs `write` against `<path>.partial` and renames it to `path` on
/// success. On failure the `.partial` file stays behind.
pub fn persist(path: &Path, write: impl FnOnce(&Path) -> bitext_core::Result<()>) -> bitext_core::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = partial_path(path);
    write(&tmp)?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn persist_text(path: &Path, text: &str) -> bitext_core::Result<()> {
    persist(path, |p| fs::write(p, text).map_err(|e| Error::io(p, e)))
}

pub fn read_text(path: &Path) -> bitext_core::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes one JSON object per line.
pub fn persist_jsonl<T: serde::Serialize>(path: &Path, items: &[T]) -> bitext_core::Result<()> {
    let mut text = String::new();
    for item in items {
        text.push_str(&serde_json::to_string(item).expect("records serialize"));
        text.push('\n');
    }
    persist_text(path, &text)
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> bitext_core::Result<Vec<T>> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| serde_json::from_str(l).map_err(|e| Error::format(path, k + 1, e.to_string())))
        .collect()
}

/// Records how long `stage` took, keeping other stages' entries.
pub fn record_timing(out: &Path, stage: &str, seconds: f64) -> bitext_core::Result<()> {
    let path = out.join(TIMINGS);
    let mut map = read_timings(out);
    map.insert(stage.to_string(), seconds);
    persist_text(&path, &serde_json::to_string_pretty(&map).expect("map serializes"))
}

pub fn read_timings(out: &Path) -> BTreeMap<String, f64> {
    fs::read_to_string(out.join(TIMINGS))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default()
}

/// Seed for one stage, derived from the global seed and the stage name so
/// that stages can be rerun on their own with the same randomness.
pub fn stage_seed(global: u64, stage: &str) -> u64 {
    // FNV-1a over the name, then a splitmix64 finalizer.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stage.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = h ^ global.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_seeds_differ_by_name_and_global() {
        assert_eq!(stage_seed(42, "negatives"), stage_seed(42, "negatives"));
        assert_ne!(stage_seed(42, "negatives"), stage_seed(42, "forest"));
        assert_ne!(stage_seed(42, "negatives"), stage_seed(43, "negatives"));
    }

    #[test]
    fn failed_write_leaves_partial() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("x.tsv");
        let err = persist(&target, |p| {
            fs::write(p, "half").unwrap();
            Err(Error::invalid("boom"))
        });
        assert!(err.is_err());
        assert!(!target.exists());
        assert!(dir.path().join("x.tsv.partial").exists());
        persist_text(&target, "done").unwrap();
        assert_eq!(fs::read_to_string(&target).unwrap(), "done");
        assert!(!dir.path().join("x.tsv.partial").exists());
    }
}
