//! Synthetic bilingual websites with known sentence alignments.
//!
//! The source language is random sentences over a made-up vocabulary; the
//! target language is the same sentences passed through a bijective word
//! cipher, spelled with a different alphabet. Each site has `/xx/page-k.html`
//! and `/yy/page-k.html` twins.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use bitext_core::dict::SeedEntry;
use bitext_core::ingest::{ManifestEntry, SentenceSplitter, SnapshotManifest, MANIFEST_FILE};
use bitext_core::{write_corpus, Corpus, CorpusKind, Error, Lang, LanguagePair, Origin, Provenance, SeedDictionary, Sentence, SentencePair};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Inputs, Languages, PipelineConfig};
use crate::error::{PipelineError, Result};

pub const TRUTH_FILE: &str = "truth.tsv";
pub const CIPHER_FILE: &str = "cipher.tsv";
pub const PSEUDO_FILE: &str = "pseudo.tsv";
pub const CONFIG_FILE: &str = "pipeline.toml";
pub const PAGES_DIR: &str = "pages";

const SRC_CONSONANTS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t"];
const SRC_VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
const TGT_CONSONANTS: &[&str] = &["h", "j", "q", "v", "w", "x", "z", "sh", "th"];
const TGT_VOWELS: &[&str] = &["a", "y", "oo", "ei"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticFixtureSpec {
    pub src: String,
    pub tgt: String,
    pub sites: usize,
    pub pages_per_site: usize,
    pub sentences_per_page: usize,
    pub vocab_size: usize,
    pub min_words: usize,
    pub max_words: usize,
    /// Share of page twins per site whose two sides are unrelated.
    pub unpaired_fraction: f64,
    /// Chance of an extra untranslated sentence after each true sentence.
    pub inserted_fraction: f64,
    /// Share of paired pages that repeat another page minus its last sentence.
    pub near_duplicate_fraction: f64,
    /// Chance of replacing each target word of the pseudo corpus.
    pub pseudo_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticFixtureSpec {
    fn default() -> Self {
        SyntheticFixtureSpec {
            src: "xx".into(),
            tgt: "yy".into(),
            sites: 40,
            pages_per_site: 10,
            sentences_per_page: 8,
            vocab_size: 1000,
            min_words: 5,
            max_words: 12,
            unpaired_fraction: 0.1,
            inserted_fraction: 0.1,
            near_duplicate_fraction: 0.0,
            pseudo_noise: 0.15,
            seed: 42,
        }
    }
}

impl SyntheticFixtureSpec {
    pub fn validate(&self) -> Result<()> {
        LanguagePair::parse(&self.src, &self.tgt).map_err(|e| PipelineError::Config(e.to_string()))?;
        let fractions = [
            self.unpaired_fraction,
            self.inserted_fraction,
            self.near_duplicate_fraction,
            self.pseudo_noise,
        ];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(PipelineError::Config("fixture fractions must lie in [0,1]".into()));
        }
        if self.sites == 0 || self.pages_per_site == 0 || self.sentences_per_page == 0 || self.vocab_size < 2 {
            return Err(PipelineError::Config("fixture sizes must be positive".into()));
        }
        if self.min_words == 0 || self.min_words > self.max_words {
            return Err(PipelineError::Config("need 1 <= min_words <= max_words".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureSummary {
    pub manifest: PathBuf,
    pub truth: PathBuf,
    pub cipher: PathBuf,
    pub pseudo: PathBuf,
    pub config: PathBuf,
    pub pages: usize,
    pub unpaired_pages: usize,
    pub inserted_sentences: usize,
    pub truth_pairs: usize,
}

struct Vocab {
    src: Vec<String>,
    tgt: Vec<String>,
    zipf: WeightedIndex<f64>,
}

fn make_words(rng: &mut ChaCha8Rng, n: usize, cons: &[&str], vows: &[&str], splitter: &SentenceSplitter) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(cons[rng.random_range(0..cons.len())]);
            w.push_str(vows[rng.random_range(0..vows.len())]);
        }
        if splitter.is_abbreviation(&format!("{w}.")) || !seen.insert(w.clone()) {
            continue;
        }
        out.push(w);
    }
    out
}

impl Vocab {
    fn new(rng: &mut ChaCha8Rng, n: usize) -> Vocab {
        let splitter = SentenceSplitter::default();
        let src = make_words(rng, n, SRC_CONSONANTS, SRC_VOWELS, &splitter);
        let tgt = make_words(rng, n, TGT_CONSONANTS, TGT_VOWELS, &splitter);
        let zipf = WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + 2.0))).expect("positive weights");
        Vocab { src, tgt, zipf }
    }
}

fn render(words: &[&str]) -> String {
    let mut s = String::new();
    for (k, w) in words.iter().enumerate() {
        if k == 0 {
            let mut chars = w.chars();
            let first = chars.next().expect("words are non-empty");
            s.extend(first.to_uppercase());
            s.push_str(chars.as_str());
        } else {
            s.push(' ');
            s.push_str(w);
        }
    }
    s.push('.');
    s
}

/// Word-id sequences with global uniqueness.
struct SentenceSource<'v> {
    vocab: &'v Vocab,
    spec: &'v SyntheticFixtureSpec,
    used: HashSet<Vec<usize>>,
}

impl SentenceSource<'_> {
    fn next(&mut self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        loop {
            let len = rng.random_range(self.spec.min_words..=self.spec.max_words);
            let ids: Vec<usize> = (0..len).map(|_| self.vocab.zipf.sample(rng)).collect();
            if self.used.insert(ids.clone()) {
                return ids;
            }
        }
    }

    fn src_text(&self, ids: &[usize]) -> String {
        render(&ids.iter().map(|&k| self.vocab.src[k].as_str()).collect::<Vec<_>>())
    }

    fn tgt_text(&self, ids: &[usize]) -> String {
        render(&ids.iter().map(|&k| self.vocab.tgt[k].as_str()).collect::<Vec<_>>())
    }
}

fn page_url(site: usize, lang: &str, page: usize) -> String {
    format!("http://site{site}.example/{lang}/page-{page}.html")
}

fn page_html(site: usize, lang: &str, other: &str, page: usize, pages: usize, paragraphs: &[Vec<String>]) -> String {
    let mut nav = String::new();
    for k in 0..pages {
        nav.push_str(&format!("<a href=\"/{lang}/page-{k}.html\">{}</a> ", k + 1));
    }
    nav.push_str(&format!("<a href=\"/{other}/page-{page}.html\">{other}</a>"));
    let mut body = String::new();
    for p in paragraphs {
        body.push_str("<p>");
        body.push_str(&p.join(" "));
        body.push_str("</p>\n");
    }
    format!(
        "<!DOCTYPE html>\n<html lang=\"{lang}\">\n<head><meta charset=\"utf-8\"><title>site{site} {page}</title></head>\n<body>\n<nav>{nav}</nav>\n<main>\n{body}</main>\n<footer><p>site{site}.example</p></footer>\n</body>\n</html>\n"
    )
}

/// Sizes of consecutive paragraphs (2 or 3 sentences, a trailing single
/// sentence allowed).
fn paragraph_sizes(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = if left <= 3 { left } else { rng.random_range(2..=3) };
        sizes.push(s);
        left -= s;
    }
    sizes
}

fn round_count(frac: f64, n: usize) -> usize {
    ((frac * n as f64).round() as usize).min(n)
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Stage {
        stage: "gen-fixture",
        source: Error::io(path, e),
    }
}

fn core(e: Error) -> PipelineError {
    PipelineError::Stage {
        stage: "gen-fixture",
        source: e,
    }
}

/// Writes the pages, manifest, truth pairs, cipher dictionary, pseudo
/// corpus and a ready-to-run config under `out_dir`.
pub fn gen_fixture(spec: &SyntheticFixtureSpec, out_dir: &Path) -> Result<FixtureSummary> {
    spec.validate()?;
    let langs = LanguagePair::parse(&spec.src, &spec.tgt).expect("validated");
    let (ls, lt) = (Lang::new(&spec.src).unwrap(), Lang::new(&spec.tgt).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocab = Vocab::new(&mut rng, spec.vocab_size);
    let mut source = SentenceSource {
        vocab: &vocab,
        spec,
        used: HashSet::new(),
    };
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut manifest = SnapshotManifest::new(out_dir);
    let mut truth: Vec<SentencePair> = Vec::new();
    let mut truth_keys: HashSet<(String, String)> = HashSet::new();
    let mut pseudo: Vec<SentencePair> = Vec::new();
    let mut unpaired_total = 0;
    let mut inserted_total = 0;
    let n = spec.sentences_per_page;

    for site in 0..spec.sites {
        let mut order: Vec<usize> = (0..spec.pages_per_site).collect();
        order.shuffle(&mut rng);
        let n_unpaired = round_count(spec.unpaired_fraction, spec.pages_per_site);
        let unpaired: HashSet<usize> = order[..n_unpaired].iter().copied().collect();
        let paired: Vec<usize> = order[n_unpaired..].to_vec();
        let n_dup = round_count(spec.near_duplicate_fraction, paired.len()).min(paired.len().saturating_sub(1));
        let near_dup: HashSet<usize> = paired[..n_dup].iter().copied().collect();
        let originals: Vec<usize> = {
            let mut v: Vec<usize> = paired[n_dup..].to_vec();
            v.sort_unstable();
            v
        };
        unpaired_total += n_unpaired;

        // Sentence ids of each paired page, originals first so copies can refer to them.
        let mut content: Vec<Option<Vec<Vec<usize>>>> = vec![None; spec.pages_per_site];
        for &p in &originals {
            content[p] = Some((0..n).map(|_| source.next(&mut rng)).collect());
        }
        let mut dup_pages: Vec<usize> = near_dup.iter().copied().collect();
        dup_pages.sort_unstable();
        for &p in &dup_pages {
            let from = originals[rng.random_range(0..originals.len())];
            let mut copy = content[from].clone().unwrap();
            if copy.len() > 1 {
                copy.pop();
            }
            content[p] = Some(copy);
        }

        for page in 0..spec.pages_per_site {
            let (src_paras, tgt_paras) = if unpaired.contains(&page) {
                let mut s = Vec::with_capacity(n);
                let mut t = Vec::with_capacity(n);
                for _ in 0..n {
                    let ids = source.next(&mut rng);
                    s.push(source.src_text(&ids));
                }
                for _ in 0..n {
                    let ids = source.next(&mut rng);
                    t.push(source.tgt_text(&ids));
                }
                let sizes = paragraph_sizes(&mut rng, n);
                (group(&s, &sizes), group(&t, &sizes))
            } else {
                let ids = content[page].clone().unwrap();
                let sizes = paragraph_sizes(&mut rng, ids.len());
                let mut src_paras = Vec::new();
                let mut tgt_paras = Vec::new();
                let mut k = 0;
                for size in sizes {
                    let mut sp = Vec::new();
                    let mut tp = Vec::new();
                    for sent in &ids[k..k + size] {
                        let (s, t) = (source.src_text(sent), source.tgt_text(sent));
                        let origin = Origin {
                            domain: format!("site{site}.example"),
                            src_url: page_url(site, &spec.src, page),
                            tgt_url: page_url(site, &spec.tgt, page),
                        };
                        let pair = SentencePair::new(Sentence::new(&s, ls.clone()), Sentence::new(&t, lt.clone()), Provenance::Synthetic)
                            .with_origin(origin);
                        if truth_keys.insert(pair.text_key()) {
                            pseudo.push(noisy_copy(&pair, sent, &vocab, spec.pseudo_noise, &lt, &mut rng));
                            truth.push(pair);
                        }
                        sp.push(s);
                        tp.push(t);
                        if rng.random_bool(spec.inserted_fraction) {
                            let extra = source.next(&mut rng);
                            inserted_total += 1;
                            if rng.random_bool(0.5) {
                                sp.push(source.src_text(&extra));
                            } else {
                                tp.push(source.tgt_text(&extra));
                            }
                        }
                    }
                    k += size;
                    src_paras.push(sp);
                    tgt_paras.push(tp);
                }
                (src_paras, tgt_paras)
            };
            for (lang, other, paras) in [(&spec.src, &spec.tgt, &src_paras), (&spec.tgt, &spec.src, &tgt_paras)] {
                let rel = PathBuf::from(PAGES_DIR).join(format!("site{site}")).join(lang).join(format!("page-{page}.html"));
                let path = out_dir.join(&rel);
                fs::create_dir_all(path.parent().unwrap()).map_err(io(out_dir))?;
                let html = page_html(site, lang, other, page, spec.pages_per_site, paras);
                fs::write(&path, html).map_err(io(&path))?;
                manifest.entries.push(ManifestEntry {
                    url: page_url(site, lang, page),
                    path: rel,
                    content_type: Some("text/html".into()),
                });
            }
        }
    }

    let manifest_path = out_dir.join(MANIFEST_FILE);
    manifest.write(&manifest_path).map_err(core)?;
    let truth_path = out_dir.join(TRUTH_FILE);
    let truth_corpus = Corpus::from_pairs(CorpusKind::Raw, langs.clone(), truth).map_err(core)?;
    write_corpus(&truth_corpus, &truth_path).map_err(core)?;
    let pseudo_path = out_dir.join(PSEUDO_FILE);
    let pseudo_corpus = Corpus::from_pairs(CorpusKind::Pseudo, langs.clone(), pseudo).map_err(core)?;
    write_corpus(&pseudo_corpus, &pseudo_path).map_err(core)?;
    let cipher_path = out_dir.join(CIPHER_FILE);
    let cipher = SeedDictionary::from_entries(vocab.src.iter().zip(&vocab.tgt).map(|(s, t)| SeedEntry {
        src: s.clone(),
        tgt: t.clone(),
        prob: 1.0,
    }));
    cipher.write(&cipher_path).map_err(core)?;

    let config = PipelineConfig {
        languages: Languages {
            src: spec.src.clone(),
            tgt: spec.tgt.clone(),
        },
        seed: spec.seed,
        out: PathBuf::from("run"),
        inputs: Inputs {
            pseudo: Some(PathBuf::from(PSEUDO_FILE)),
            snapshot: Some(PathBuf::from(".")),
            ..Inputs::default()
        },
        ..PipelineConfig::default()
    };
    let config_path = out_dir.join(CONFIG_FILE);
    fs::write(&config_path, config.to_toml()).map_err(io(&config_path))?;

    Ok(FixtureSummary {
        manifest: manifest_path,
        truth: truth_path,
        cipher: cipher_path,
        pseudo: pseudo_path,
        config: config_path,
        pages: manifest.entries.len(),
        unpaired_pages: unpaired_total,
        inserted_sentences: inserted_total,
        truth_pairs: truth_corpus.len(),
    })
}

fn group(sentences: &[String], sizes: &[usize]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut k = 0;
    for &s in sizes {
        out.push(sentences[k..k + s].to_vec());
        k += s;
    }
    out
}

/// The true pair with each target word replaced, with probability `noise`,
/// by a uniformly drawn target word.
fn noisy_copy(pair: &SentencePair, ids: &[usize], vocab: &Vocab, noise: f64, lt: &Lang, rng: &mut ChaCha8Rng) -> SentencePair {
    let words: Vec<&str> = ids
        .iter()
        .map(|&k| {
            if rng.random_bool(noise) {
                vocab.tgt[rng.random_range(0..vocab.tgt.len())].as_str()
            } else {
                vocab.tgt[k].as_str()
            }
        })
        .collect();
    SentencePair::new(pair.src.clone(), Sentence::new(&render(&words), lt.clone()), Provenance::Pseudo)
}
