//! Filtering the raw crawled corpus: heuristic rules, then a random forest
//! trained on pseudo-parallel positives against crossed negatives.

mod features;
mod forest;
mod negatives;
mod rules;

use rayon::prelude::*;

pub use features::{FeatureExtractor, FeatureVector, FEATURE_NAMES, N_FEATURES};
pub use forest::{train_forest, ForestModel, ForestParams, Node, Tree, MODEL_MAGIC, MODEL_VERSION};
pub use negatives::gen_negatives;
pub use rules::{heuristic_filter, overlap_ratio, HeuristicOutcome, RemovalReason, RuleReport, MAX_OVERLAP, MIN_TOKENS};

use crate::corpus::{Corpus, CorpusKind, SentencePair};
use crate::error::{Error, Result};
use crate::num::Real;

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_NEG_RATIO: f64 = 1.0;

pub fn score_pair<F: Real>(model: &ForestModel<F>, fv: &FeatureVector) -> f64 {
    model.score(fv)
}

pub fn extract_all(pairs: &[SentencePair], fx: &FeatureExtractor<'_>) -> Result<Vec<FeatureVector>> {
    pairs.par_iter().map(|p| fx.extract(p)).collect()
}

/// Splits `b` into accepted and rejected pairs. Every pair gets its forest
/// score; the decision compares the score as stored (6 decimals) with
/// `threshold`, so reloading the outputs reproduces the split.
pub fn classify_corpus<F: Real>(
    b: &Corpus,
    model: &ForestModel<F>,
    threshold: f64,
    fx: &FeatureExtractor<'_>,
) -> Result<(Corpus, Corpus)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("classifier threshold {threshold} outside [0,1]")));
    }
    let feats = extract_all(b.pairs(), fx)?;
    let scores: Vec<f64> = feats.par_iter().map(|f| model.score(f)).collect();
    let mut accepted = Corpus::new(CorpusKind::Filtered, b.languages().clone());
    let mut rejected = Corpus::new(CorpusKind::Rejected, b.languages().clone());
    for (pair, score) in b.pairs().iter().zip(scores) {
        let mut pair = pair.clone();
        pair.set_score(score);
        if pair.score().unwrap() >= threshold {
            accepted.push(pair)?;
        } else {
            rejected.push(pair)?;
        }
    }
    Ok((accepted, rejected))
}
