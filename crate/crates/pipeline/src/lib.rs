//! Configuration, stage sequencing, reporting and the synthetic fixture
//! behind the `bitext` command.

pub mod artifacts;
pub mod config;
mod error;
pub mod evaluate;
pub mod fixture;
pub mod report;
pub mod stages;

pub use config::PipelineConfig;
pub use error::{PipelineError, Result};
pub use evaluate::{evaluate_against_truth, Evaluation};
pub use fixture::{gen_fixture, FixtureSummary, SyntheticFixtureSpec};
pub use report::PipelineReport;

/// Runs `body` on a pool of `workers` threads (0 means one per core).
pub fn with_workers<T: Send>(workers: usize, body: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    pool.install(body)
}

/// Validates `cfg`, then runs every stage in order. Each stage reads what
/// the previous ones persisted, so the result equals running the stage
/// subcommands one after another.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport> {
    cfg.validate_for_run()?;
    with_workers(cfg.workers, || {
        stages::induce_dict(cfg)?;
        stages::ingest(cfg)?;
        stages::align_docs(cfg)?;
        stages::align_sents(cfg)?;
        stages::filter_rules(cfg)?;
        stages::train_filter(cfg)?;
        stages::classify(cfg)?;
        report::report(cfg)
    })
}
