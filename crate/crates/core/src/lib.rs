//! Unsupervised bitext mining.
//!
//! Starting from a pseudo-parallel corpus (monolingual text plus its machine
//! translation), this crate induces a word translation dictionary with
//! IBM Model 1 EM, extracts and language-identifies text from web pages,
//! pairs documents across languages, aligns their sentences with a
//! dictionary-driven dynamic program, and filters the resulting bitext with
//! heuristic rules and a random forest trained on the pseudo-parallel data.

pub mod corpus;
pub mod dict;
pub mod docalign;
mod edit;
mod error;
pub mod filter;
pub mod ingest;
pub mod lang;
pub mod num;
pub mod sentalign;
pub mod text;

pub use corpus::{read_corpus, write_corpus, Corpus, CorpusKind, Origin, Provenance, PseudoParallelCorpus, SentencePair};
pub use dict::{extract_seed, train_ibm1, SeedDictionary};
pub use error::{Error, Result};
pub use lang::{Lang, LanguagePair};
pub use num::Real;
pub use text::{tokenize, Sentence};

/// Translation table at the precision the pipeline uses.
pub type TranslationTable = dict::ProbabilisticDictionary<f64>;
/// Random forest at the precision the pipeline uses.
pub type Forest = filter::ForestModel<f64>;
