use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Provenance, PseudoParallelCorpus, SentencePair};
use crate::error::{Error, Result};

/// Non-parallel pairs built by crossing the source of one pair with the
/// target of another. Draws `ceil(ratio * |A|)` pairs; a draw that
/// reproduces any true pair's text is discarded and redrawn.
pub fn gen_negatives(a: &PseudoParallelCorpus, ratio: f64, seed: u64) -> Result<Vec<SentencePair>> {
    let pairs = a.pairs();
    if pairs.len() < 2 {
        return Err(Error::invalid("negative sampling needs at least 2 pairs"));
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::invalid(format!("negative ratio {ratio} must be positive")));
    }
    let wanted = (ratio * pairs.len() as f64).ceil() as usize;
    let truth: HashSet<(String, String)> = pairs.iter().map(SentencePair::text_key).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(wanted);
    let max_draws = wanted.saturating_mul(100).max(10_000);
    let mut draws = 0usize;
    while out.len() < wanted {
        draws += 1;
        if draws > max_draws {
            return Err(Error::invalid("could not draw enough crossed pairs distinct from the true pairs"));
        }
        let i = rng.random_range(0..pairs.len());
        let mut j = rng.random_range(0..pairs.len() - 1);
        if j >= i {
            j += 1;
        }
        let neg = SentencePair::new(pairs[i].src.clone(), pairs[j].tgt.clone(), Provenance::Synthetic);
        if truth.contains(&neg.text_key()) {
            continue;
        }
        out.push(neg);
    }
    Ok(out)
}
