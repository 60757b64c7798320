//! Dictionary induction from the pseudo-parallel corpus.

mod ibm1;
mod seed;

pub use ibm1::{train_ibm1, Ibm1Trainer, ProbabilisticDictionary, NULL_TOKEN};
pub use seed::{extract_seed, write_table, SeedDictionary, SeedEntry};

/// Default EM settings.
pub const DEFAULT_ITERATIONS: usize = 10;
pub const DEFAULT_SMOOTHING: f64 = 1e-6;
pub const DEFAULT_MIN_PROB: f64 = 0.1;
pub const DEFAULT_CAP: usize = 4;
