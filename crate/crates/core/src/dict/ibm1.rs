//! IBM Model 1 lexical translation probabilities estimated by EM.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::corpus::PseudoParallelCorpus;
use crate::error::{Error, Result};
use crate::num::Real;

/// Source-side token that every target word may align to.
pub const NULL_TOKEN: &str = "NULL";

/// Pairs per E-step shard upper bound on shard count. Shards depend only on
/// the corpus size, so the summation order (and thus every bit of the
/// result) does not depend on the number of worker threads.
const MIN_SHARD_PAIRS: usize = 512;
const MAX_SHARDS: usize = 64;

/// Lexical translation table t(target | source).
///
/// Each source row stores explicit probabilities for the target words that
/// co-occurred with it in training and a floor shared by every other target
/// word, so a row sums to one over the whole target vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilisticDictionary<F> {
    src_vocab: Vec<String>,
    tgt_vocab: Vec<String>,
    src_index: HashMap<String, u32>,
    tgt_index: HashMap<String, u32>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    probs: Vec<F>,
    floors: Vec<F>,
    smoothing: F,
    iterations_run: usize,
    log_likelihoods: Vec<f64>,
}

impl<F: Real> ProbabilisticDictionary<F> {
    /// Source vocabulary, `NULL` first.
    pub fn src_vocab(&self) -> &[String] {
        &self.src_vocab
    }

    pub fn tgt_vocab(&self) -> &[String] {
        &self.tgt_vocab
    }

    pub fn iterations_run(&self) -> usize {
        self.iterations_run
    }

    /// Corpus log-likelihood before training and after each iteration.
    pub fn log_likelihoods(&self) -> &[f64] {
        &self.log_likelihoods
    }

    pub fn final_log_likelihood(&self) -> f64 {
        self.log_likelihoods.last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    pub fn smoothing(&self) -> F {
        self.smoothing
    }

    /// t(tgt | src). Unknown source words give `None`; unknown target words
    /// get the row floor.
    pub fn prob(&self, src: &str, tgt: &str) -> Option<F> {
        let s = *self.src_index.get(src)? as usize;
        Some(match self.tgt_index.get(tgt) {
            Some(&t) => self.prob_ids(s, t),
            None => self.floors[s],
        })
    }

    fn prob_ids(&self, s: usize, t: u32) -> F {
        let range = self.row_start[s]..self.row_start[s + 1];
        match self.cols[range.clone()].binary_search(&t) {
            Ok(k) => self.probs[range.start + k],
            Err(_) => self.floors[s],
        }
    }

    /// Explicit (co-occurrence) entries of a source row, in target-id order.
    pub fn row(&self, src: &str) -> Vec<(&str, F)> {
        let Some(&s) = self.src_index.get(src) else {
            return Vec::new();
        };
        let s = s as usize;
        (self.row_start[s]..self.row_start[s + 1])
            .map(|k| (self.tgt_vocab[self.cols[k] as usize].as_str(), self.probs[k]))
            .collect()
    }

    /// Probability shared by target words without an explicit entry.
    pub fn row_floor(&self, src: &str) -> Option<F> {
        self.src_index.get(src).map(|&s| self.floors[s as usize])
    }

    /// Sum of a row over the full target vocabulary.
    pub fn row_sum(&self, src: &str) -> Option<F> {
        let s = *self.src_index.get(src)? as usize;
        let range = self.row_start[s]..self.row_start[s + 1];
        let explicit: F = self.probs[range.clone()].iter().copied().sum();
        let implicit = self.tgt_vocab.len() - range.len();
        Some(explicit + self.floors[s] * F::of_usize(implicit))
    }

    /// Log-likelihood of a corpus under this table.
    ///
    /// Per pair with `l` source and `m` target tokens:
    /// `-ln(l+1) + Σ_j ln( Σ_i t(f_j|e_i) / (l+1) )`, where `i` runs over the
    /// source tokens plus `NULL`. The leading term is the uniform length prior.
    /// Source tokens outside the vocabulary contribute nothing to the inner
    /// sum; target tokens outside it take the row floor.
    pub fn log_likelihood(&self, corpus: &PseudoParallelCorpus) -> f64 {
        corpus
            .pairs()
            .iter()
            .map(|p| {
                let mut src_ids: Vec<Option<usize>> = vec![Some(0)];
                src_ids.extend(p.src.tokens().iter().map(|t| self.src_index.get(t).map(|&i| i as usize)));
                let l = p.src.len();
                let norm = F::of_usize(l + 1);
                let mut ll = -((l + 1) as f64).ln();
                for tok in p.tgt.tokens() {
                    let tid = self.tgt_index.get(tok).copied();
                    let mut sum = F::zero();
                    for s in src_ids.iter().flatten() {
                        sum = sum
                            + match tid {
                                Some(t) => self.prob_ids(*s, t),
                                None => self.floors[*s],
                            };
                    }
                    ll += (sum / norm).as_f64().ln();
                }
                ll
            })
            .sum()
    }
}

/// Corpus encoded as vocabulary ids, ready for repeated EM passes.
struct Encoded {
    /// Source ids with `NULL` (id 0) first.
    src: Vec<Vec<u32>>,
    tgt: Vec<Vec<u32>>,
}

/// Stateful EM trainer. Running `k` iterations and then `k` more produces
/// exactly the table of running `2k` at once.
pub struct Ibm1Trainer<F> {
    dict: ProbabilisticDictionary<F>,
    data: Encoded,
}

impl<F: Real> Ibm1Trainer<F> {
    pub fn new(corpus: &PseudoParallelCorpus, smoothing: F) -> Result<Self> {
        if !(smoothing >= F::zero()) || !smoothing.is_finite() {
            return Err(Error::invalid("smoothing must be a finite value >= 0"));
        }
        let mut src_vocab = vec![NULL_TOKEN.to_string()];
        let mut src_index: HashMap<String, u32> = HashMap::from([(NULL_TOKEN.to_string(), 0)]);
        let mut tgt_vocab = Vec::new();
        let mut tgt_index: HashMap<String, u32> = HashMap::new();
        let mut data = Encoded {
            src: Vec::with_capacity(corpus.len()),
            tgt: Vec::with_capacity(corpus.len()),
        };
        for pair in corpus.pairs() {
            let mut s_ids = vec![0u32];
            for tok in pair.src.tokens() {
                let next = src_vocab.len() as u32;
                let id = *src_index.entry(tok.clone()).or_insert_with(|| {
                    src_vocab.push(tok.clone());
                    next
                });
                s_ids.push(id);
            }
            let mut t_ids = Vec::with_capacity(pair.tgt.len());
            for tok in pair.tgt.tokens() {
                let next = tgt_vocab.len() as u32;
                let id = *tgt_index.entry(tok.clone()).or_insert_with(|| {
                    tgt_vocab.push(tok.clone());
                    next
                });
                t_ids.push(id);
            }
            data.src.push(s_ids);
            data.tgt.push(t_ids);
        }

        let mut cooc: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); src_vocab.len()];
        for (s_ids, t_ids) in data.src.iter().zip(&data.tgt) {
            for &s in s_ids {
                cooc[s as usize].extend(t_ids.iter().copied());
            }
        }
        let mut row_start = Vec::with_capacity(src_vocab.len() + 1);
        let mut cols = Vec::new();
        row_start.push(0);
        for set in &cooc {
            cols.extend(set.iter().copied());
            row_start.push(cols.len());
        }

        let uniform = if tgt_vocab.is_empty() {
            F::zero()
        } else {
            F::one() / F::of_usize(tgt_vocab.len())
        };
        let dict = ProbabilisticDictionary {
            probs: vec![uniform; cols.len()],
            floors: vec![uniform; src_vocab.len()],
            src_vocab,
            tgt_vocab,
            src_index,
            tgt_index,
            row_start,
            cols,
            smoothing,
            iterations_run: 0,
            log_likelihoods: Vec::new(),
        };
        Ok(Ibm1Trainer { dict, data })
    }

    pub fn dictionary(&self) -> &ProbabilisticDictionary<F> {
        &self.dict
    }

    pub fn into_dictionary(self) -> ProbabilisticDictionary<F> {
        self.dict
    }

    /// Runs `iterations` EM steps and records the resulting likelihood.
    pub fn run(&mut self, iterations: usize) {
        for _ in 0..iterations {
            self.step();
        }
        if self.dict.log_likelihoods.len() == self.dict.iterations_run {
            let (_, ll) = self.expectation();
            self.dict.log_likelihoods.push(ll);
        }
    }

    /// One E-step plus M-step.
    pub fn step(&mut self) {
        let (counts, ll) = self.expectation();
        if self.dict.log_likelihoods.len() == self.dict.iterations_run {
            self.dict.log_likelihoods.push(ll);
        }
        self.maximize(&counts);
        self.dict.iterations_run += 1;
    }

    fn shard_size(&self) -> usize {
        let n = self.data.src.len();
        MIN_SHARD_PAIRS.max(n.div_ceil(MAX_SHARDS))
    }

    /// Expected alignment counts (indexed like `probs`) and the corpus
    /// log-likelihood of the current table.
    fn expectation(&self) -> (Vec<F>, f64) {
        let dict = &self.dict;
        let size = self.shard_size();
        let nnz = dict.cols.len();
        let shards: Vec<(Vec<F>, f64)> = self
            .data
            .src
            .par_chunks(size)
            .zip(self.data.tgt.par_chunks(size))
            .map(|(srcs, tgts)| {
                let mut counts = vec![F::zero(); nnz];
                let mut ll = 0.0f64;
                let mut slots: Vec<usize> = Vec::new();
                for (s_ids, t_ids) in srcs.iter().zip(tgts) {
                    let l1 = s_ids.len();
                    let norm = F::of_usize(l1);
                    ll -= (l1 as f64).ln();
                    for &t in t_ids {
                        slots.clear();
                        let mut denom = F::zero();
                        for &s in s_ids {
                            let s = s as usize;
                            let range = dict.row_start[s]..dict.row_start[s + 1];
                            let k = range.start
                                + dict.cols[range]
                                    .binary_search(&t)
                                    .expect("co-occurring pair has an explicit entry");
                            slots.push(k);
                            denom = denom + dict.probs[k];
                        }
                        ll += (denom / norm).as_f64().ln();
                        if denom > F::zero() {
                            for &k in &slots {
                                counts[k] = counts[k] + dict.probs[k] / denom;
                            }
                        }
                    }
                }
                (counts, ll)
            })
            .collect();

        let mut total = vec![F::zero(); nnz];
        let mut ll = 0.0;
        for (counts, shard_ll) in shards {
            for (acc, c) in total.iter_mut().zip(counts) {
                *acc = *acc + c;
            }
            ll += shard_ll;
        }
        (total, ll)
    }

    fn maximize(&mut self, counts: &[F]) {
        let dict = &mut self.dict;
        let vocab = F::of_usize(dict.tgt_vocab.len());
        let lambda = dict.smoothing;
        for s in 0..dict.src_vocab.len() {
            let range = dict.row_start[s]..dict.row_start[s + 1];
            let total: F = counts[range.clone()].iter().copied().sum();
            let denom = total + lambda * vocab;
            if denom > F::zero() {
                for k in range {
                    dict.probs[k] = (counts[k] + lambda) / denom;
                }
                dict.floors[s] = lambda / denom;
            }
        }
    }
}

/// Trains IBM Model 1 on `corpus` for `iterations` EM steps.
pub fn train_ibm1<F: Real>(
    corpus: &PseudoParallelCorpus,
    iterations: usize,
    smoothing: F,
) -> Result<ProbabilisticDictionary<F>> {
    if iterations == 0 {
        return Err(Error::invalid("iterations must be >= 1"));
    }
    let mut trainer = Ibm1Trainer::new(corpus, smoothing)?;
    trainer.run(iterations);
    Ok(trainer.into_dictionary())
}
