//! Sentence pairs, corpora and the TSV bitext format.
//!
//! One pair per line: `src <TAB> tgt <TAB> score <TAB> provenance <TAB> origin`.
//! Backslash, tab, CR and LF inside text are escaped as `\\`, `\t`, `\r`, `\n`.
//! The score is written with 6 fractional digits, or `-` when unset. The origin
//! is a JSON object or `null`.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::LanguagePair;
use crate::num::quantize_score;
use crate::text::{normalize_whitespace, Sentence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Pseudo,
    Crawled,
    Synthetic,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Pseudo => "pseudo",
            Provenance::Crawled => "crawled",
            Provenance::Synthetic => "synthetic",
        }
    }
}

impl FromStr for Provenance {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pseudo" => Ok(Provenance::Pseudo),
            "crawled" => Ok(Provenance::Crawled),
            "synthetic" => Ok(Provenance::Synthetic),
            other => Err(format!("unknown provenance {other:?}")),
        }
    }
}

/// Where a crawled pair came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Origin {
    pub domain: String,
    pub src_url: String,
    pub tgt_url: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub src: Sentence,
    pub tgt: Sentence,
    score: Option<f64>,
    pub provenance: Provenance,
    pub origin: Option<Origin>,
}

impl SentencePair {
    pub fn new(src: Sentence, tgt: Sentence, provenance: Provenance) -> Self {
        SentencePair {
            src,
            tgt,
            score: None,
            provenance,
            origin: None,
        }
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn score(&self) -> Option<f64> {
        self.score
    }

    /// Stores the score clamped to [0,1] and rounded to the 6 digits kept on
    /// disk, so that what is in memory is exactly what a reload produces.
    pub fn set_score(&mut self, score: f64) {
        let clamped = if score.is_nan() { 0.0 } else { score.clamp(0.0, 1.0) };
        self.score = Some(quantize_score(clamped));
    }

    pub fn clear_score(&mut self) {
        self.score = None;
    }

    /// Whitespace-normalized (src, tgt) text, the identity used for
    /// deduplication and evaluation.
    pub fn text_key(&self) -> (String, String) {
        (normalize_whitespace(self.src.text()), normalize_whitespace(self.tgt.text()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorpusKind {
    /// Pseudo-parallel seed corpus produced by an unsupervised translator.
    Pseudo,
    /// Raw crawled bitext.
    Raw,
    /// Classifier-approved bitext.
    Filtered,
    /// Pairs rejected by the classifier.
    Rejected,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pairs: Vec<SentencePair>,
    kind: CorpusKind,
    languages: LanguagePair,
}

impl Corpus {
    pub fn new(kind: CorpusKind, languages: LanguagePair) -> Self {
        Corpus {
            pairs: Vec::new(),
            kind,
            languages,
        }
    }

    /// Builds a corpus, checking that every pair carries the corpus languages
    /// and, for filtered corpora, a score.
    pub fn from_pairs(kind: CorpusKind, languages: LanguagePair, pairs: Vec<SentencePair>) -> Result<Self> {
        let mut corpus = Corpus::new(kind, languages);
        for pair in pairs {
            corpus.push(pair)?;
        }
        Ok(corpus)
    }

    pub fn push(&mut self, pair: SentencePair) -> Result<()> {
        if pair.src.lang() != self.languages.src() || pair.tgt.lang() != self.languages.tgt() {
            return Err(Error::invalid(format!(
                "pair languages {}-{} do not match corpus {}-{}",
                pair.src.lang(),
                pair.tgt.lang(),
                self.languages.src(),
                self.languages.tgt()
            )));
        }
        if self.kind == CorpusKind::Filtered && pair.score.is_none() {
            return Err(Error::invalid("filtered corpus pairs must carry a score"));
        }
        self.pairs.push(pair);
        Ok(())
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<SentencePair> {
        self.pairs
    }

    pub fn kind(&self) -> CorpusKind {
        self.kind
    }

    pub fn languages(&self) -> &LanguagePair {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Same pairs, other kind.
    pub fn relabel(self, kind: CorpusKind) -> Result<Self> {
        Corpus::from_pairs(kind, self.languages, self.pairs)
    }
}

/// The pseudo-parallel seed corpus: monolingual source text paired with its
/// machine translation. Never empty.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoParallelCorpus(Corpus);

impl PseudoParallelCorpus {
    pub fn new(corpus: Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::Empty("pseudo-parallel corpus"));
        }
        Ok(PseudoParallelCorpus(corpus.relabel(CorpusKind::Pseudo)?))
    }

    pub fn corpus(&self) -> &Corpus {
        &self.0
    }

    pub fn pairs(&self) -> &[SentencePair] {
        self.0.pairs()
    }

    pub fn languages(&self) -> &LanguagePair {
        self.0.languages()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same corpus read in the other direction (target becomes source).
    pub fn reversed(&self) -> PseudoParallelCorpus {
        let pairs = self
            .pairs()
            .iter()
            .map(|p| SentencePair {
                src: p.tgt.clone(),
                tgt: p.src.clone(),
                score: p.score,
                provenance: p.provenance,
                origin: p.origin.clone(),
            })
            .collect();
        PseudoParallelCorpus(Corpus {
            pairs,
            kind: CorpusKind::Pseudo,
            languages: self.languages().reversed(),
        })
    }
}

pub fn escape_field(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape_field`]. An unknown or dangling escape is kept verbatim.
pub fn unescape_field(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// One corpus line, without the trailing newline.
pub fn format_pair(pair: &SentencePair) -> String {
    let score = match pair.score {
        Some(s) => format!("{s:.6}"),
        None => "-".to_string(),
    };
    let origin = serde_json::to_string(&pair.origin).expect("origin serializes");
    format!(
        "{}\t{}\t{}\t{}\t{}",
        escape_field(pair.src.text()),
        escape_field(pair.tgt.text()),
        score,
        pair.provenance.as_str(),
        origin
    )
}

pub fn parse_pair(line: &str, languages: &LanguagePair) -> std::result::Result<SentencePair, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 5 {
        return Err(format!("expected 5 tab-separated columns, found {}", cols.len()));
    }
    let src = Sentence::new(&unescape_field(cols[0]), languages.src().clone());
    let tgt = Sentence::new(&unescape_field(cols[1]), languages.tgt().clone());
    let score = match cols[2] {
        "-" => None,
        s => {
            let v: f64 = s.parse().map_err(|_| format!("bad score {s:?}"))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("score {v} outside [0,1]"));
            }
            Some(v)
        }
    };
    let provenance = cols[3].parse()?;
    let origin: Option<Origin> = serde_json::from_str(cols[4]).map_err(|e| format!("bad origin: {e}"))?;
    Ok(SentencePair {
        src,
        tgt,
        score,
        provenance,
        origin,
    })
}

pub fn read_corpus(path: &Path, kind: CorpusKind, languages: &LanguagePair) -> Result<Corpus> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut corpus = Corpus::new(kind, languages.clone());
    for (idx, line) in content.lines().enumerate() {
        let pair = parse_pair(line, languages).map_err(|m| Error::format(path, idx + 1, m))?;
        corpus.push(pair).map_err(|e| Error::format(path, idx + 1, e.to_string()))?;
    }
    Ok(corpus)
}

pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for pair in corpus.pairs() {
        writeln!(out, "{}", format_pair(pair)).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CorpusKind::Pseudo => "pseudo",
            CorpusKind::Raw => "raw",
            CorpusKind::Filtered => "filtered",
            CorpusKind::Rejected => "rejected",
        };
        f.write_str(name)
    }
}
