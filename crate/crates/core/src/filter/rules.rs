use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SentencePair};
use crate::error::{Error, Result};
use crate::text::Sentence;

/// Pairs with either side shorter than this many tokens are removed.
pub const MIN_TOKENS: usize = 4;
/// Pairs whose overlap ratio is strictly above this are removed.
pub const MAX_OVERLAP: f64 = 0.5;

/// Unique tokens shared by both sides over the smaller side's unique tokens.
pub fn overlap_ratio(src: &Sentence, tgt: &Sentence) -> Result<f64> {
    let a: BTreeSet<&str> = src.tokens().iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = tgt.tokens().iter().map(String::as_str).collect();
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("overlap ratio of an empty sentence"));
    }
    Ok(a.intersection(&b).count() as f64 / a.len().min(b.len()) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemovalReason {
    Duplicate,
    Short,
    Overlap,
}

impl RemovalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RemovalReason::Duplicate => "duplicate",
            RemovalReason::Short => "short",
            RemovalReason::Overlap => "overlap",
        }
    }
}

impl fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleReport {
    pub kept: usize,
    pub removed_duplicate: usize,
    pub removed_short: usize,
    pub removed_overlap: usize,
}

impl RuleReport {
    pub fn removed(&self) -> usize {
        self.removed_duplicate + self.removed_short + self.removed_overlap
    }

    pub fn input(&self) -> usize {
        self.kept + self.removed()
    }
}

#[derive(Clone, Debug)]
pub struct HeuristicOutcome {
    pub kept: Corpus,
    pub removed: Vec<(SentencePair, RemovalReason)>,
    pub report: RuleReport,
}

/// Applies, in order: duplicate removal (first occurrence of each
/// whitespace-normalized text pair survives), the minimum length rule, and
/// the maximum overlap rule.
pub fn heuristic_filter(corpus: &Corpus) -> HeuristicOutcome {
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut kept = Corpus::new(corpus.kind(), corpus.languages().clone());
    let mut removed = Vec::new();
    let mut report = RuleReport::default();
    for pair in corpus.pairs() {
        let reason = if !seen.insert(pair.text_key()) {
            Some(RemovalReason::Duplicate)
        } else if pair.src.len() < MIN_TOKENS || pair.tgt.len() < MIN_TOKENS {
            Some(RemovalReason::Short)
        } else if overlap_ratio(&pair.src, &pair.tgt).is_ok_and(|r| r > MAX_OVERLAP) {
            Some(RemovalReason::Overlap)
        } else {
            None
        };
        match reason {
            None => {
                report.kept += 1;
                kept.push(pair.clone()).expect("pair comes from a corpus of the same kind");
            }
            Some(r) => {
                match r {
                    RemovalReason::Duplicate => report.removed_duplicate += 1,
                    RemovalReason::Short => report.removed_short += 1,
                    RemovalReason::Overlap => report.removed_overlap += 1,
                }
                removed.push((pair.clone(), r));
            }
        }
    }
    HeuristicOutcome { kept, removed, report }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusKind, Provenance};
    use crate::lang::{Lang, LanguagePair};

    fn s(text: &str, l: &str) -> Sentence {
        Sentence::new(text, Lang::new(l).unwrap())
    }

    fn pair(a: &str, b: &str) -> SentencePair {
        SentencePair::new(s(a, "xx"), s(b, "yy"), Provenance::Crawled)
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap_ratio(&s("a b c", "xx"), &s("a b c", "yy")).unwrap(), 1.0);
        assert_eq!(overlap_ratio(&s("a b", "xx"), &s("c d", "yy")).unwrap(), 0.0);
        assert_eq!(overlap_ratio(&s("a b c d", "xx"), &s("a b x y", "yy")).unwrap(), 0.5);
        assert!(overlap_ratio(&s("", "xx"), &s("a", "yy")).is_err());
    }

    #[test]
    fn rules_in_order() {
        let langs = LanguagePair::parse("xx", "yy").unwrap();
        let pairs = vec![
            pair("one two three four", "uno dos tres cuatro"),
            pair("one  two three four", "uno dos tres cuatro"),
            pair("one two three", "uno dos tres cuatro"),
            pair("a b c d", "a b x y"),
            pair("a b c d", "a b c y"),
        ];
        let corpus = Corpus::from_pairs(CorpusKind::Raw, langs, pairs).unwrap();
        let out = heuristic_filter(&corpus);
        let reasons: Vec<RemovalReason> = out.removed.iter().map(|(_, r)| *r).collect();
        assert_eq!(reasons, [RemovalReason::Duplicate, RemovalReason::Short, RemovalReason::Overlap]);
        assert_eq!(out.kept.len(), 2);
        assert_eq!(out.report.input(), 5);
        assert_eq!(heuristic_filter(&out.kept).report.removed(), 0);
    }
}
