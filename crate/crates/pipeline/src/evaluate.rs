use std::collections::HashSet;

use bitext_core::{Corpus, SentencePair};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mined: usize,
    pub truth: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision and recall of mined pairs against the true pairs, matching on
/// whitespace-normalized text. Precision of an empty result is reported as 0.
pub fn evaluate_against_truth(mined: &Corpus, truth: &Corpus) -> Evaluation {
    let truth_keys: HashSet<(String, String)> = truth.pairs().iter().map(SentencePair::text_key).collect();
    let correct = mined.pairs().iter().filter(|p| truth_keys.contains(&p.text_key())).count();
    let found: HashSet<(String, String)> = mined
        .pairs()
        .iter()
        .map(SentencePair::text_key)
        .filter(|k| truth_keys.contains(k))
        .collect();
    let precision = if mined.is_empty() { 0.0 } else { correct as f64 / mined.len() as f64 };
    let recall = if truth_keys.is_empty() { 0.0 } else { found.len() as f64 / truth_keys.len() as f64 };
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Evaluation {
        mined: mined.len(),
        truth: truth_keys.len(),
        correct,
        precision,
        recall,
        f1,
    }
}
