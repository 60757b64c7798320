//! The pipeline stages. Each reads its inputs from the configuration and
//! from artifacts already in the output directory, and persists its own.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use bitext_core::corpus::format_pair;
use bitext_core::dict::{extract_seed, train_ibm1, write_table};
use bitext_core::docalign::{DocumentAligner, DocumentPair, DocumentPairRecord, LanguageAliases};
use bitext_core::filter::{classify_corpus, extract_all, gen_negatives, heuristic_filter, train_forest, FeatureExtractor};
use bitext_core::ingest::{
    fetch_domain, load_snapshot, DocumentBuilder, FetchStatus, HttpFetcher, LanguageProfiles, SentenceSplitter, SystemClock,
    WebDocument,
};
use bitext_core::sentalign::align_all;
use bitext_core::{
    read_corpus, write_corpus, Corpus, CorpusKind, Error, Forest, LanguagePair, PseudoParallelCorpus, SeedDictionary,
    TranslationTable,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::*;
use crate::config::PipelineConfig;
use crate::error::{PipelineError, Result};

pub const INDUCE_DICT: &str = "induce-dict";
pub const INGEST: &str = "ingest";
pub const ALIGN_DOCS: &str = "align-docs";
pub const ALIGN_SENTS: &str = "align-sents";
pub const FILTER_RULES: &str = "filter-rules";
pub const TRAIN_FILTER: &str = "train-filter";
pub const CLASSIFY: &str = "classify";
pub const REPORT: &str = "report";

/// Stage order of a full run.
pub const STAGES: [&str; 8] = [INDUCE_DICT, INGEST, ALIGN_DOCS, ALIGN_SENTS, FILTER_RULES, TRAIN_FILTER, CLASSIFY, REPORT];

/// Log-likelihood history of both EM directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictStats {
    pub forward_log_likelihoods: Vec<f64>,
    pub reverse_log_likelihoods: Vec<f64>,
    pub seed_entries: usize,
    pub seed_entries_rev: usize,
}

fn out_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| PipelineError::Config(format!("{what} is required")))
}

/// Runs `body` and records its wall-clock time.
fn timed<T>(cfg: &PipelineConfig, stage: &'static str, body: impl FnOnce() -> bitext_core::Result<T>) -> Result<T> {
    let start = Instant::now();
    let value = body().map_err(PipelineError::stage(stage))?;
    record_timing(&cfg.out, stage, start.elapsed().as_secs_f64()).map_err(PipelineError::stage(stage))?;
    Ok(value)
}

fn pseudo_corpus(cfg: &PipelineConfig, langs: &LanguagePair) -> Result<PseudoParallelCorpus> {
    let path = require(&cfg.inputs.pseudo, "inputs.pseudo")?;
    let corpus = read_corpus(path, CorpusKind::Pseudo, langs).map_err(|e| PipelineError::Config(e.to_string()))?;
    PseudoParallelCorpus::new(corpus).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

/// Character trigram profiles of both languages, learned from the
/// pseudo-parallel corpus.
pub fn language_profiles(a: &PseudoParallelCorpus) -> LanguageProfiles {
    let langs = a.languages();
    LanguageProfiles::train(
        a.pairs()
            .iter()
            .flat_map(|p| [(langs.src(), p.src.text()), (langs.tgt(), p.tgt.text())]),
    )
}

pub fn induce_dict(cfg: &PipelineConfig) -> Result<DictStats> {
    let langs = cfg.language_pair()?;
    let a = pseudo_corpus(cfg, &langs)?;
    let d = &cfg.dict;
    timed(cfg, INDUCE_DICT, || {
        let forward: TranslationTable = train_ibm1(&a, d.iterations, d.smoothing)?;
        let reverse: TranslationTable = train_ibm1(&a.reversed(), d.iterations, d.smoothing)?;
        let seed = extract_seed(&forward, d.min_prob, d.cap)?;
        let seed_rev = extract_seed(&reverse, d.min_prob, d.cap)?;
        persist(&out_path(cfg, SEED_DICT), |p| seed.write(p))?;
        persist(&out_path(cfg, SEED_DICT_REV), |p| seed_rev.write(p))?;
        persist(&out_path(cfg, PROB_TABLE), |p| write_table(&forward, p))?;
        persist(&out_path(cfg, PROB_TABLE_REV), |p| write_table(&reverse, p))?;
        let stats = DictStats {
            forward_log_likelihoods: forward.log_likelihoods().to_vec(),
            reverse_log_likelihoods: reverse.log_likelihoods().to_vec(),
            seed_entries: seed.len(),
            seed_entries_rev: seed_rev.len(),
        };
        persist_text(&out_path(cfg, DICT_STATS), &serde_json::to_string_pretty(&stats).unwrap())?;
        Ok(stats)
    })
}

fn document_builder(cfg: &PipelineConfig, profiles: LanguageProfiles) -> Result<DocumentBuilder> {
    let splitter = match &cfg.inputs.abbreviations {
        Some(p) => SentenceSplitter::from_file(p).map_err(|e| PipelineError::Config(e.to_string()))?,
        None => SentenceSplitter::default(),
    };
    Ok(DocumentBuilder::new(splitter, Some(profiles)))
}

fn read_domains(path: &Path) -> bitext_core::Result<Vec<String>> {
    let text = read_text(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Loads the snapshot or crawls the domain list; returns the documents.
pub fn ingest(cfg: &PipelineConfig) -> Result<Vec<WebDocument>> {
    let langs = cfg.language_pair()?;
    let a = pseudo_corpus(cfg, &langs)?;
    let builder = document_builder(cfg, language_profiles(&a))?;
    let manifest = cfg.manifest();
    if manifest.is_none() && cfg.inputs.domains.is_none() {
        return Err(PipelineError::Config("inputs.snapshot or inputs.domains is required".into()));
    }
    timed(cfg, INGEST, || {
        let docs = match (&manifest, &cfg.inputs.domains) {
            (Some(m), _) => load_snapshot(m, &builder)?,
            (None, Some(list)) => {
                let domains = read_domains(list)?;
                let limits = cfg.crawl.limits();
                let timeout = Duration::from_millis(cfg.crawl.timeout_ms);
                let per_domain: Vec<bitext_core::Result<Vec<WebDocument>>> = domains
                    .par_iter()
                    .map(|d| {
                        let mut fetcher = HttpFetcher::new(timeout);
                        fetch_domain(d, &cfg.crawl.scheme, limits, &mut fetcher, &SystemClock::default(), &builder)
                    })
                    .collect();
                let mut docs = Vec::new();
                for (d, r) in domains.iter().zip(per_domain) {
                    match r {
                        Ok(v) => docs.extend(v),
                        Err(e) => eprintln!("warning: {d}: {e}"),
                    }
                }
                if docs.is_empty() {
                    return Err(Error::NothingFetched(list.display().to_string()));
                }
                docs
            }
            (None, None) => unreachable!(),
        };
        persist_jsonl(&out_path(cfg, DOCUMENTS), &docs)?;
        Ok(docs)
    })
}

fn read_seed(path: &Path) -> bitext_core::Result<SeedDictionary> {
    SeedDictionary::read(path)
}

fn aliases(cfg: &PipelineConfig) -> Result<LanguageAliases> {
    match &cfg.inputs.aliases {
        Some(p) => LanguageAliases::with_file(p).map_err(|e| PipelineError::Config(e.to_string())),
        None => Ok(LanguageAliases::default()),
    }
}

pub fn align_docs(cfg: &PipelineConfig) -> Result<Vec<DocumentPairRecord>> {
    let langs = cfg.language_pair()?;
    let aliases = aliases(cfg)?;
    timed(cfg, ALIGN_DOCS, || {
        let docs: Vec<WebDocument> = read_jsonl(&out_path(cfg, DOCUMENTS))?;
        let seed = read_seed(&out_path(cfg, SEED_DICT))?;
        let mut by_domain: BTreeMap<String, (Vec<WebDocument>, Vec<WebDocument>)> = BTreeMap::new();
        for d in docs {
            if d.fetch_status == FetchStatus::Failed {
                continue;
            }
            let entry = by_domain.entry(d.domain()).or_default();
            match &d.lang {
                Some(l) if l == langs.src() => entry.0.push(d),
                Some(l) if l == langs.tgt() => entry.1.push(d),
                _ => {}
            }
        }
        let aligner = DocumentAligner {
            languages: &langs,
            aliases: &aliases,
            seed: &seed,
            weights: cfg.doc_align.weights(),
            threshold: cfg.doc_align.threshold,
        };
        let per_domain: Vec<Vec<DocumentPair>> = by_domain
            .par_iter()
            .map(|(_, (p, q))| aligner.align(p, q))
            .collect::<bitext_core::Result<_>>()?;
        let records: Vec<DocumentPairRecord> = per_domain.iter().flatten().map(DocumentPair::record).collect();
        persist_jsonl(&out_path(cfg, DOC_PAIRS), &records)?;
        Ok(records)
    })
}

pub fn align_sents(cfg: &PipelineConfig) -> Result<Corpus> {
    let langs = cfg.language_pair()?;
    timed(cfg, ALIGN_SENTS, || {
        let docs: Vec<WebDocument> = read_jsonl(&out_path(cfg, DOCUMENTS))?;
        let by_url: HashMap<&str, &WebDocument> = docs.iter().map(|d| (d.url.as_str(), d)).collect();
        let doc_pairs_path = out_path(cfg, DOC_PAIRS);
        let records: Vec<DocumentPairRecord> = read_jsonl(&doc_pairs_path)?;
        let lookup = |url: &str| {
            by_url
                .get(url)
                .map(|d| (*d).clone())
                .ok_or_else(|| Error::format(&doc_pairs_path, 0, format!("unknown document {url}")))
        };
        let pairs: Vec<DocumentPair> = records
            .iter()
            .map(|r| {
                Ok(DocumentPair {
                    src_doc: lookup(&r.src_url)?,
                    tgt_doc: lookup(&r.tgt_url)?,
                    url_score: r.url_score,
                    structure_score: r.structure_score,
                    content_score: r.content_score,
                    total: r.total,
                })
            })
            .collect::<bitext_core::Result<_>>()?;
        let seed_path = cfg.inputs.dict.clone().unwrap_or_else(|| out_path(cfg, SEED_DICT));
        let seed = read_seed(&seed_path)?;
        let sentence_pairs = align_all(&pairs, &seed, &cfg.sent_align)?;
        let corpus = Corpus::from_pairs(CorpusKind::Raw, langs.clone(), sentence_pairs)?;
        persist(&out_path(cfg, CRAWLED), |p| write_corpus(&corpus, p))?;
        Ok(corpus)
    })
}

pub fn filter_rules(cfg: &PipelineConfig) -> Result<bitext_core::filter::RuleReport> {
    let langs = cfg.language_pair()?;
    timed(cfg, FILTER_RULES, || {
        let raw = read_corpus(&out_path(cfg, CRAWLED), CorpusKind::Raw, &langs)?;
        let outcome = heuristic_filter(&raw);
        persist(&out_path(cfg, FILTERED_RULES), |p| write_corpus(&outcome.kept, p))?;
        let mut removed = String::new();
        for (pair, reason) in &outcome.removed {
            removed.push_str(reason.as_str());
            removed.push('\t');
            removed.push_str(&format_pair(pair));
            removed.push('\n');
        }
        persist_text(&out_path(cfg, HEURISTIC_REMOVED), &removed)?;
        persist_text(&out_path(cfg, RULE_REPORT), &serde_json::to_string_pretty(&outcome.report).unwrap())?;
        Ok(outcome.report)
    })
}

fn seeds_and_profiles(
    cfg: &PipelineConfig,
    a: &PseudoParallelCorpus,
) -> bitext_core::Result<(SeedDictionary, SeedDictionary, LanguageProfiles)> {
    let st = read_seed(&out_path(cfg, SEED_DICT))?;
    let ts = read_seed(&out_path(cfg, SEED_DICT_REV))?;
    Ok((st, ts, language_profiles(a)))
}

pub fn train_filter(cfg: &PipelineConfig) -> Result<Forest> {
    let langs = cfg.language_pair()?;
    let a = pseudo_corpus(cfg, &langs)?;
    timed(cfg, TRAIN_FILTER, || {
        let (st, ts, profiles) = seeds_and_profiles(cfg, &a)?;
        let fx = FeatureExtractor {
            languages: &langs,
            seed_st: &st,
            seed_ts: &ts,
            profiles: Some(&profiles),
        };
        let negatives = gen_negatives(&a, cfg.filter.neg_ratio, stage_seed(cfg.seed, "negatives"))?;
        let neg_corpus = Corpus::from_pairs(CorpusKind::Raw, langs.clone(), negatives)?;
        persist(&out_path(cfg, NEGATIVES), |p| write_corpus(&neg_corpus, p))?;
        let pos = extract_all(a.pairs(), &fx)?;
        let neg = extract_all(neg_corpus.pairs(), &fx)?;
        let model: Forest = train_forest(&pos, &neg, cfg.filter.forest(), stage_seed(cfg.seed, "forest"))?;
        persist(&out_path(cfg, FOREST), |p| model.write(p))?;
        Ok(model)
    })
}

pub fn classify(cfg: &PipelineConfig) -> Result<(Corpus, Corpus)> {
    let langs = cfg.language_pair()?;
    let a = pseudo_corpus(cfg, &langs)?;
    timed(cfg, CLASSIFY, || {
        let (st, ts, profiles) = seeds_and_profiles(cfg, &a)?;
        let fx = FeatureExtractor {
            languages: &langs,
            seed_st: &st,
            seed_ts: &ts,
            profiles: Some(&profiles),
        };
        let b = read_corpus(&out_path(cfg, FILTERED_RULES), CorpusKind::Raw, &langs)?;
        let model = Forest::read(&out_path(cfg, FOREST))?;
        let (c, rejected) = classify_corpus(&b, &model, cfg.filter.threshold, &fx)?;
        persist(&out_path(cfg, ACCEPTED), |p| write_corpus(&c, p))?;
        persist(&out_path(cfg, REJECTED), |p| write_corpus(&rejected, p))?;
        Ok((c, rejected))
    })
}
