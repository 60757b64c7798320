//! Sentence alignment inside a document pair: a dynamic program over six
//! bead shapes, each bead scored by dictionary coverage and length ratio.

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Origin, Provenance, SentencePair};
use crate::dict::SeedDictionary;
use crate::docalign::DocumentPair;
use crate::error::{Error, Result};
use crate::text::Sentence;

/// Shape of a bead: how many source and target sentences it groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BeadPattern {
    #[serde(rename = "1-1")]
    OneOne,
    #[serde(rename = "2-1")]
    TwoOne,
    #[serde(rename = "1-2")]
    OneTwo,
    #[serde(rename = "2-2")]
    TwoTwo,
    #[serde(rename = "1-0")]
    OneZero,
    #[serde(rename = "0-1")]
    ZeroOne,
}

impl BeadPattern {
    /// All patterns, most preferred first; the DP resolves equal scores in
    /// this order.
    pub const ALL: [BeadPattern; 6] = [
        BeadPattern::OneOne,
        BeadPattern::TwoOne,
        BeadPattern::OneTwo,
        BeadPattern::TwoTwo,
        BeadPattern::OneZero,
        BeadPattern::ZeroOne,
    ];

    /// `(source sentences, target sentences)`.
    pub fn sizes(self) -> (usize, usize) {
        match self {
            BeadPattern::OneOne => (1, 1),
            BeadPattern::TwoOne => (2, 1),
            BeadPattern::OneTwo => (1, 2),
            BeadPattern::TwoTwo => (2, 2),
            BeadPattern::OneZero => (1, 0),
            BeadPattern::ZeroOne => (0, 1),
        }
    }

    pub fn from_sizes(src: usize, tgt: usize) -> Option<BeadPattern> {
        BeadPattern::ALL.into_iter().find(|p| p.sizes() == (src, tgt))
    }

    pub fn is_gap(self) -> bool {
        matches!(self, BeadPattern::OneZero | BeadPattern::ZeroOne)
    }

    /// Position in [`BeadPattern::ALL`]; lower is preferred.
    pub fn rank(self) -> usize {
        BeadPattern::ALL.iter().position(|p| *p == self).unwrap()
    }
}

impl fmt::Display for BeadPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (s, t) = self.sizes();
        write!(f, "{s}-{t}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bead {
    pub pattern: BeadPattern,
    pub src: Range<usize>,
    pub tgt: Range<usize>,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentPath {
    pub beads: Vec<Bead>,
    pub total_score: f64,
}

impl AlignmentPath {
    /// True if the beads cover `0..n_src` and `0..n_tgt` in order, without
    /// gaps or overlaps, and each bead's ranges fit its pattern.
    pub fn tiles(&self, n_src: usize, n_tgt: usize) -> bool {
        let (mut i, mut j) = (0, 0);
        for b in &self.beads {
            let (ds, dt) = b.pattern.sizes();
            if b.src != (i..i + ds) || b.tgt != (j..j + dt) {
                return false;
            }
            i += ds;
            j += dt;
        }
        i == n_src && j == n_tgt
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignParams {
    pub dict_weight: f64,
    pub length_weight: f64,
    /// Score of a 1-0 or 0-1 bead; not positive.
    pub gap_penalty: f64,
    /// Minimum bead score for a bead to be emitted as a pair.
    pub accept_threshold: f64,
}

impl Default for AlignParams {
    fn default() -> Self {
        AlignParams {
            dict_weight: 0.7,
            length_weight: 0.3,
            gap_penalty: -0.15,
            accept_threshold: 0.3,
        }
    }
}

impl AlignParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.dict_weight, self.length_weight, self.gap_penalty, self.accept_threshold];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("alignment parameters must be finite"));
        }
        if self.dict_weight < 0.0 || self.length_weight < 0.0 {
            return Err(Error::invalid("alignment weights must be non-negative"));
        }
        if self.dict_weight + self.length_weight <= 0.0 {
            return Err(Error::invalid("dict_weight + length_weight must be positive"));
        }
        if self.gap_penalty > 0.0 {
            return Err(Error::invalid("gap penalty must not be positive"));
        }
        Ok(())
    }
}

/// Fraction of tokens linked one-to-one through the seed dictionary: each
/// source token in order takes the first free target token it translates to.
pub fn dict_coverage_tokens<S: AsRef<str>>(src: &[S], tgt: &[S], seed: &SeedDictionary) -> f64 {
    if src.is_empty() && tgt.is_empty() {
        return 0.0;
    }
    let mut linked = vec![false; tgt.len()];
    let mut links = 0usize;
    for s in src {
        let s = s.as_ref();
        if seed.candidates(s).is_empty() {
            continue;
        }
        if let Some(k) = (0..tgt.len()).find(|&k| !linked[k] && seed.contains(s, tgt[k].as_ref())) {
            linked[k] = true;
            links += 1;
        }
    }
    2.0 * links as f64 / (src.len() + tgt.len()) as f64
}

pub fn dict_coverage(src: &Sentence, tgt: &Sentence, seed: &SeedDictionary) -> f64 {
    dict_coverage_tokens(src.tokens(), tgt.tokens(), seed)
}

/// `min / max` of two token counts.
pub fn length_score(src_len: usize, tgt_len: usize) -> Result<f64> {
    if src_len == 0 && tgt_len == 0 {
        return Err(Error::invalid("length score of two empty sides"));
    }
    Ok(src_len.min(tgt_len) as f64 / src_len.max(tgt_len) as f64)
}

/// Score of grouping `src` with `tgt`; group sizes must form a bead pattern.
pub fn bead_score(src: &[Sentence], tgt: &[Sentence], seed: &SeedDictionary, params: &AlignParams) -> Result<f64> {
    let pattern = BeadPattern::from_sizes(src.len(), tgt.len())
        .ok_or_else(|| Error::invalid(format!("no bead pattern {}-{}", src.len(), tgt.len())))?;
    Ok(score_groups(pattern, src, tgt, seed, params))
}

fn score_groups(pattern: BeadPattern, src: &[Sentence], tgt: &[Sentence], seed: &SeedDictionary, params: &AlignParams) -> f64 {
    if pattern.is_gap() {
        return params.gap_penalty;
    }
    let s: Vec<&str> = src.iter().flat_map(|x| x.tokens()).map(String::as_str).collect();
    let t: Vec<&str> = tgt.iter().flat_map(|x| x.tokens()).map(String::as_str).collect();
    let cov = dict_coverage_tokens(&s, &t, seed);
    let len = length_score(s.len(), t.len()).unwrap_or(0.0);
    params.dict_weight * cov + params.length_weight * len
}

/// Highest-scoring tiling of the two sentence lists. Among equal totals the
/// path whose last bead comes first in [`BeadPattern::ALL`] wins, then the
/// same rule applies to the prefix it extends.
pub fn align_path(src: &[Sentence], tgt: &[Sentence], seed: &SeedDictionary, params: &AlignParams) -> Result<AlignmentPath> {
    params.validate()?;
    if src.is_empty() || tgt.is_empty() {
        return Err(Error::invalid("sentence alignment needs sentences on both sides"));
    }
    let (n, m) = (src.len(), tgt.len());
    let w = m + 1;
    let mut best = vec![f64::NEG_INFINITY; (n + 1) * w];
    let mut back: Vec<Option<(BeadPattern, f64)>> = vec![None; (n + 1) * w];
    best[0] = 0.0;
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut cell: Option<(f64, BeadPattern, f64)> = None;
            for p in BeadPattern::ALL {
                let (ds, dt) = p.sizes();
                if ds > i || dt > j {
                    continue;
                }
                let prev = best[(i - ds) * w + (j - dt)];
                if prev == f64::NEG_INFINITY {
                    continue;
                }
                let s = score_groups(p, &src[i - ds..i], &tgt[j - dt..j], seed, params);
                let total = prev + s;
                if cell.is_none_or(|(t, _, _)| total > t) {
                    cell = Some((total, p, s));
                }
            }
            if let Some((t, p, s)) = cell {
                best[i * w + j] = t;
                back[i * w + j] = Some((p, s));
            }
        }
    }
    let mut beads = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let (p, s) = back[i * w + j].expect("every cell is reachable through gap beads");
        let (ds, dt) = p.sizes();
        beads.push(Bead {
            pattern: p,
            src: i - ds..i,
            tgt: j - dt..j,
            score: s,
        });
        i -= ds;
        j -= dt;
    }
    beads.reverse();
    Ok(AlignmentPath {
        beads,
        total_score: best[n * w + m],
    })
}

fn join(sentences: &[Sentence]) -> Sentence {
    let text: Vec<&str> = sentences.iter().map(Sentence::text).collect();
    Sentence::new(&text.join(" "), sentences[0].lang().clone())
}

/// Non-gap beads scoring at least the accept threshold, as crawled pairs.
pub fn emit_pairs(path: &AlignmentPath, src: &[Sentence], tgt: &[Sentence], params: &AlignParams, origin: Option<&Origin>) -> Vec<SentencePair> {
    path.beads
        .iter()
        .filter(|b| !b.pattern.is_gap() && b.score >= params.accept_threshold)
        .map(|b| {
            let mut pair = SentencePair::new(join(&src[b.src.clone()]), join(&tgt[b.tgt.clone()]), Provenance::Crawled);
            if let Some(o) = origin {
                pair = pair.with_origin(o.clone());
            }
            pair.set_score(b.score);
            pair
        })
        .collect()
}

pub fn align_sentences(pair: &DocumentPair, seed: &SeedDictionary, params: &AlignParams) -> Result<(AlignmentPath, Vec<SentencePair>)> {
    let (src, tgt) = (&pair.src_doc.sentences, &pair.tgt_doc.sentences);
    let path = align_path(src, tgt, seed, params)?;
    let origin = Origin {
        domain: pair.src_doc.domain(),
        src_url: pair.src_doc.url.clone(),
        tgt_url: pair.tgt_doc.url.clone(),
    };
    let pairs = emit_pairs(&path, src, tgt, params, Some(&origin));
    Ok((path, pairs))
}

/// Aligns every document pair in parallel; output keeps input order. Pairs
/// with an empty side contribute nothing.
pub fn align_all(pairs: &[DocumentPair], seed: &SeedDictionary, params: &AlignParams) -> Result<Vec<SentencePair>> {
    params.validate()?;
    let per_doc: Vec<Vec<SentencePair>> = pairs
        .par_iter()
        .map(|p| {
            if p.src_doc.sentences.is_empty() || p.tgt_doc.sentences.is_empty() {
                return Ok(Vec::new());
            }
            align_sentences(p, seed, params).map(|(_, v)| v)
        })
        .collect::<Result<_>>()?;
    Ok(per_doc.into_iter().flatten().collect())
}
