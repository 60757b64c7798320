//! Run summary assembled by recounting the persisted artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use bitext_core::docalign::DocumentPairRecord;
use bitext_core::filter::{RemovalReason, RuleReport};
use bitext_core::ingest::{FetchStatus, WebDocument};
use bitext_core::num::round2;
use bitext_core::{read_corpus, CorpusKind, Error, LanguagePair};
use serde::{Deserialize, Serialize};

use crate::artifacts::*;
use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};
use crate::stages::REPORT;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub languages: String,
    pub domains_processed: usize,
    pub documents_fetched: usize,
    pub documents_failed: usize,
    pub document_pairs: usize,
    pub raw_pairs: usize,
    pub rules: RuleReport,
    pub accepted: usize,
    pub rejected: usize,
    /// `100 * removed / input` of the heuristic rules, 2 decimals.
    pub heuristic_removed_pct: f64,
    /// `100 * rejected / kept` of the classifier, 2 decimals.
    pub classifier_removed_pct: f64,
    /// `100 * (raw - accepted) / raw`, 2 decimals.
    pub total_removed_pct: f64,
    pub stage_seconds: BTreeMap<String, f64>,
}

/// `100 * part / whole` rounded to 2 decimals; 0 when `whole` is 0.
pub fn percentage(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        round2(100.0 * part as f64 / whole as f64)
    }
}

fn count_removed(path: &Path) -> bitext_core::Result<RuleReport> {
    let text = read_text(path)?;
    let mut r = RuleReport::default();
    for (k, line) in text.lines().enumerate() {
        let reason = line.split('\t').next().unwrap_or("");
        match reason {
            s if s == RemovalReason::Duplicate.as_str() => r.removed_duplicate += 1,
            s if s == RemovalReason::Short.as_str() => r.removed_short += 1,
            s if s == RemovalReason::Overlap.as_str() => r.removed_overlap += 1,
            _ => return Err(Error::format(path, k + 1, format!("unknown removal reason {reason:?}"))),
        }
    }
    Ok(r)
}

/// Builds the report from the artifacts in `out`.
pub fn recount(out: &Path, langs: &LanguagePair) -> bitext_core::Result<PipelineReport> {
    let docs: Vec<WebDocument> = read_jsonl(&out.join(DOCUMENTS))?;
    let domains: BTreeSet<String> = docs.iter().map(WebDocument::domain).collect();
    let failed = docs.iter().filter(|d| d.fetch_status == FetchStatus::Failed).count();
    let doc_pairs: Vec<DocumentPairRecord> = read_jsonl(&out.join(DOC_PAIRS))?;
    let raw = read_corpus(&out.join(CRAWLED), CorpusKind::Raw, langs)?;
    let kept = read_corpus(&out.join(FILTERED_RULES), CorpusKind::Raw, langs)?;
    let mut rules = count_removed(&out.join(HEURISTIC_REMOVED))?;
    rules.kept = kept.len();
    let accepted = read_corpus(&out.join(ACCEPTED), CorpusKind::Filtered, langs)?;
    let rejected = read_corpus(&out.join(REJECTED), CorpusKind::Rejected, langs)?;
    let mut stage_seconds = read_timings(out);
    stage_seconds.remove(REPORT);
    Ok(PipelineReport {
        languages: langs.to_string(),
        domains_processed: domains.len(),
        documents_fetched: docs.len() - failed,
        documents_failed: failed,
        document_pairs: doc_pairs.len(),
        raw_pairs: raw.len(),
        rules,
        accepted: accepted.len(),
        rejected: rejected.len(),
        heuristic_removed_pct: percentage(rules.removed(), raw.len()),
        classifier_removed_pct: percentage(rejected.len(), kept.len()),
        total_removed_pct: percentage(raw.len().saturating_sub(accepted.len()), raw.len()),
        stage_seconds,
    })
}

impl PipelineReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut row = |label: &str, value: String| writeln!(s, "{label:<28}{value:>12}").unwrap();
        row("languages", self.languages.clone());
        row("domains processed", self.domains_processed.to_string());
        row("documents fetched", self.documents_fetched.to_string());
        row("documents failed", self.documents_failed.to_string());
        row("document pairs", self.document_pairs.to_string());
        row("raw pairs (B)", self.raw_pairs.to_string());
        row("  removed duplicate", self.rules.removed_duplicate.to_string());
        row("  removed short", self.rules.removed_short.to_string());
        row("  removed overlap", self.rules.removed_overlap.to_string());
        row("kept by rules", self.rules.kept.to_string());
        row("heuristic removal", format!("{:.2}%", self.heuristic_removed_pct));
        row("accepted (C)", self.accepted.to_string());
        row("rejected (B-C)", self.rejected.to_string());
        row("classifier removal", format!("{:.2}%", self.classifier_removed_pct));
        row("total removal", format!("{:.2}%", self.total_removed_pct));
        for (stage, secs) in &self.stage_seconds {
            row(&format!("time {stage}"), format!("{secs:.3}s"));
        }
        s
    }
}

pub fn report(cfg: &PipelineConfig) -> Result<PipelineReport> {
    let langs = cfg.language_pair()?;
    let start = Instant::now();
    let stage = PipelineError::stage(REPORT);
    let report = recount(&cfg.out, &langs).map_err(PipelineError::stage(REPORT))?;
    persist_text(&cfg.out.join(REPORT_JSON), &serde_json::to_string_pretty(&report).unwrap())
        .and_then(|_| persist_text(&cfg.out.join(REPORT_TEXT), &report.to_text()))
        .and_then(|_| record_timing(&cfg.out, REPORT, start.elapsed().as_secs_f64()))
        .map_err(stage)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentages_round_to_two_decimals() {
        assert_eq!(percentage(1, 3), 33.33);
        assert_eq!(percentage(2, 3), 66.67);
        assert_eq!(percentage(0, 0), 0.0);
        assert_eq!(percentage(5, 5), 100.0);
    }
}
