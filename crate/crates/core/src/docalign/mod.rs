//! Pairing pages of one site across the two languages.

mod url_score;

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dict::SeedDictionary;
use crate::edit::normalized_edit_distance;
use crate::error::{Error, Result};
use crate::ingest::WebDocument;
use crate::lang::LanguagePair;

pub use url_score::{url_match_score, LanguageAliases, LANG_PLACEHOLDER};

/// `1 - levenshtein / max(len)` over tag sequences; 1 for two empty ones.
pub fn structure_score<S: AsRef<str> + PartialEq>(sig_a: &[S], sig_b: &[S]) -> f64 {
    1.0 - normalized_edit_distance(sig_a, sig_b)
}

fn bag<'a>(tokens: impl Iterator<Item = &'a String>) -> (HashMap<&'a str, usize>, usize) {
    let mut map = HashMap::new();
    let mut n = 0;
    for t in tokens {
        *map.entry(t.as_str()).or_insert(0) += 1;
        n += 1;
    }
    (map, n)
}

/// Overlap between `doc_a` translated word-by-word (top-1 seed entry) and
/// `doc_b`, as multisets, over the larger document's token count.
pub fn content_score(doc_a: &WebDocument, doc_b: &WebDocument, seed: &SeedDictionary) -> f64 {
    let (a, na) = bag(doc_a.tokens());
    let (b, nb) = bag(doc_b.tokens());
    content_from_bags(&a, na, &b, nb, seed)
}

fn content_from_bags(
    a: &HashMap<&str, usize>,
    na: usize,
    b: &HashMap<&str, usize>,
    nb: usize,
    seed: &SeedDictionary,
) -> f64 {
    if na == 0 || nb == 0 {
        return 0.0;
    }
    let mut translated: HashMap<&str, usize> = HashMap::new();
    for (tok, count) in a {
        if let Some(t) = seed.top1(tok) {
            *translated.entry(t).or_insert(0) += count;
        }
    }
    let shared: usize = translated
        .iter()
        .map(|(t, c)| (*c).min(b.get(t).copied().unwrap_or(0)))
        .sum();
    shared as f64 / na.max(nb) as f64
}

/// Non-negative weights of the URL, structure and content scores, summing to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocWeights {
    pub url: f64,
    pub structure: f64,
    pub content: f64,
}

impl Default for DocWeights {
    fn default() -> Self {
        DocWeights {
            url: 0.5,
            structure: 0.25,
            content: 0.25,
        }
    }
}

impl DocWeights {
    pub fn new(url: f64, structure: f64, content: f64) -> Result<Self> {
        let w = DocWeights { url, structure, content };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.url, self.structure, self.content];
        if parts.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("document weights must be finite and non-negative"));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("document weights must sum to 1"));
        }
        Ok(())
    }

    pub fn combine(&self, url: f64, structure: f64, content: f64) -> f64 {
        (self.url * url + self.structure * structure + self.content * content).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DocumentPair {
    pub src_doc: WebDocument,
    pub tgt_doc: WebDocument,
    pub url_score: f64,
    pub structure_score: f64,
    pub content_score: f64,
    pub total: f64,
}

impl DocumentPair {
    pub fn record(&self) -> DocumentPairRecord {
        DocumentPairRecord {
            src_url: self.src_doc.url.clone(),
            tgt_url: self.tgt_doc.url.clone(),
            url_score: self.url_score,
            structure_score: self.structure_score,
            content_score: self.content_score,
            total: self.total,
        }
    }
}

/// JSON Lines form of a document pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentPairRecord {
    pub src_url: String,
    pub tgt_url: String,
    pub url_score: f64,
    pub structure_score: f64,
    pub content_score: f64,
    pub total: f64,
}

/// Scored candidate `(src index, tgt index)` before matching.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub src: usize,
    pub tgt: usize,
    pub url_score: f64,
    pub structure_score: f64,
    pub content_score: f64,
    pub total: f64,
}

/// Document alignment settings shared across sites.
#[derive(Clone, Debug)]
pub struct DocumentAligner<'a> {
    pub languages: &'a LanguagePair,
    pub aliases: &'a LanguageAliases,
    /// Source-to-target seed dictionary.
    pub seed: &'a SeedDictionary,
    pub weights: DocWeights,
    pub threshold: f64,
}

impl DocumentAligner<'_> {
    /// Scores every cross pair.
    pub fn candidates(&self, docs_p: &[WebDocument], docs_q: &[WebDocument]) -> Vec<Candidate> {
        let tokens: BTreeSet<String> = self.aliases.pair_tokens(self.languages);
        let bags_q: Vec<_> = docs_q.iter().map(|d| bag(d.tokens())).collect();
        docs_p
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, dp)| {
                let (bp, np) = bag(dp.tokens());
                let tokens = &tokens;
                let bags_q = &bags_q;
                docs_q.iter().enumerate().map(move |(j, dq)| {
                    let url = url_score::url_match_score_with(&dp.url, &dq.url, tokens);
                    let structure = structure_score(&dp.tag_signature, &dq.tag_signature);
                    let (bq, nq) = &bags_q[j];
                    let content = content_from_bags(&bp, np, bq, *nq, self.seed);
                    Candidate {
                        src: i,
                        tgt: j,
                        url_score: url,
                        structure_score: structure,
                        content_score: content,
                        total: self.weights.combine(url, structure, content),
                    }
                })
            })
            .collect()
    }

    pub fn align(&self, docs_p: &[WebDocument], docs_q: &[WebDocument]) -> Result<Vec<DocumentPair>> {
        self.weights.validate()?;
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::invalid(format!("document threshold {} outside [0,1]", self.threshold)));
        }
        let cands = self.candidates(docs_p, docs_q);
        let src_urls: Vec<&str> = docs_p.iter().map(|d| d.url.as_str()).collect();
        let tgt_urls: Vec<&str> = docs_q.iter().map(|d| d.url.as_str()).collect();
        let chosen = greedy_match(&cands, &src_urls, &tgt_urls, self.threshold);
        Ok(chosen
            .into_iter()
            .map(|c| DocumentPair {
                src_doc: docs_p[c.src].clone(),
                tgt_doc: docs_q[c.tgt].clone(),
                url_score: c.url_score,
                structure_score: c.structure_score,
                content_score: c.content_score,
                total: c.total,
            })
            .collect())
    }
}

/// One-to-one greedy matching: candidates in descending total order (ties by
/// source URL then target URL), each kept if both documents are still free
/// and its total reaches `threshold`.
pub fn greedy_match(cands: &[Candidate], src_urls: &[&str], tgt_urls: &[&str], threshold: f64) -> Vec<Candidate> {
    let mut order: Vec<&Candidate> = cands.iter().collect();
    order.sort_by(|a, b| {
        b.total
            .total_cmp(&a.total)
            .then_with(|| src_urls[a.src].cmp(src_urls[b.src]))
            .then_with(|| tgt_urls[a.tgt].cmp(tgt_urls[b.tgt]))
    });
    let mut used_src = vec![false; src_urls.len()];
    let mut used_tgt = vec![false; tgt_urls.len()];
    let mut out = Vec::new();
    for c in order {
        if c.total < threshold {
            break;
        }
        if used_src[c.src] || used_tgt[c.tgt] {
            continue;
        }
        used_src[c.src] = true;
        used_tgt[c.tgt] = true;
        out.push(*c);
    }
    out
}

/// Free-function form of [`DocumentAligner::align`].
pub fn align_documents(
    docs_p: &[WebDocument],
    docs_q: &[WebDocument],
    languages: &LanguagePair,
    seed: &SeedDictionary,
    weights: DocWeights,
    threshold: f64,
) -> Result<Vec<DocumentPair>> {
    let aliases = LanguageAliases::default();
    DocumentAligner {
        languages,
        aliases: &aliases,
        seed,
        weights,
        threshold,
    }
    .align(docs_p, docs_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dict::SeedEntry;
    use crate::ingest::FetchStatus;
    use crate::lang::Lang;
    use crate::text::Sentence;

    fn doc(url: &str, lang: &str, text: &str, sig: &[&str]) -> WebDocument {
        let lang = Lang::new(lang).unwrap();
        WebDocument {
            url: url.to_string(),
            raw_html: Vec::new(),
            text_blocks: vec![text.to_string()],
            sentences: if text.is_empty() { vec![] } else { vec![Sentence::new(text, lang.clone())] },
            lang: Some(lang),
            lang_confidence: 1.0,
            tag_signature: sig.iter().map(|s| s.to_string()).collect(),
            fetch_status: FetchStatus::FromSnapshot,
        }
    }

    fn seed(pairs: &[(&str, &str)]) -> SeedDictionary {
        SeedDictionary::from_entries(pairs.iter().map(|(s, t)| SeedEntry {
            src: s.to_string(),
            tgt: t.to_string(),
            prob: 1.0,
        }))
    }

    #[test]
    fn structure_examples() {
        assert_eq!(structure_score(&["p", "div"], &["p", "div"]), 1.0);
        assert_eq!(structure_score(&["p", "p", "p"], &["div", "div", "div"]), 0.0);
        assert!((structure_score(&["body", "p", "p"], &["body", "p"]) - (1.0 - 1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(structure_score::<&str>(&[], &[]), 1.0);
    }

    #[test]
    fn content_examples() {
        let fr = doc("x.com/fr/1", "fr", "la maison", &[]);
        let en = doc("x.com/en/1", "en", "the house", &[]);
        let s = seed(&[("la", "the"), ("maison", "house")]);
        assert_eq!(content_score(&fr, &en, &s), 1.0);
        assert_eq!(content_score(&doc("x.com/fr/2", "fr", "", &[]), &en, &s), 0.0);
        assert_eq!(content_score(&fr, &en, &seed(&[("chat", "cat")])), 0.0);
        // Multiset cap: "la la" translates to two "the", only one is present.
        let fr2 = doc("x.com/fr/3", "fr", "la la", &[]);
        assert_eq!(content_score(&fr2, &en, &s), 0.5);
    }

    #[test]
    fn greedy_trace() {
        let urls_a = ["a1", "a2"];
        let urls_b = ["b1", "b2"];
        let c = |src, tgt, total| Candidate {
            src,
            tgt,
            url_score: 0.0,
            structure_score: 0.0,
            content_score: 0.0,
            total,
        };
        let cands = [c(0, 0, 0.9), c(0, 1, 0.8), c(1, 1, 0.7), c(1, 0, 0.2)];
        let got: Vec<(usize, usize)> = greedy_match(&cands, &urls_a, &urls_b, 0.5).iter().map(|c| (c.src, c.tgt)).collect();
        assert_eq!(got, [(0, 0), (1, 1)]);
        assert!(greedy_match(&cands, &urls_a, &urls_b, 0.95).is_empty());
    }

    #[test]
    fn single_pair_and_empty_sides() {
        let l = LanguagePair::parse("fr", "en").unwrap();
        let s = seed(&[("la", "the"), ("maison", "house")]);
        let p = [doc("x.com/fr/1", "fr", "la maison", &["p"])];
        let q = [doc("x.com/en/1", "en", "the house", &["p"])];
        let pairs = align_documents(&p, &q, &l, &s, DocWeights::default(), 0.5).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].total, 1.0);
        assert!(align_documents(&p, &[], &l, &s, DocWeights::default(), 0.5).unwrap().is_empty());
        assert!(align_documents(&p, &q, &l, &s, DocWeights { url: 0.5, structure: 0.5, content: 0.5 }, 0.5).is_err());
        assert!(align_documents(&p, &q, &l, &s, DocWeights::default(), 1.5).is_err());
    }
}
