use std::path::PathBuf;
use std::process::ExitCode;

use bitext_core::{read_corpus, CorpusKind};
use bitext_pipeline::artifacts::ACCEPTED;
use bitext_pipeline::{
    evaluate_against_truth, gen_fixture, report, run_pipeline, stages, with_workers, PipelineConfig, PipelineError,
    Result, SyntheticFixtureSpec,
};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bitext", version, about = "Mine parallel sentences from bilingual websites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train IBM Model 1 on the pseudo-parallel corpus and extract seed dictionaries.
    InduceDict {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        dict: DictArgs,
    },
    /// Load a snapshot or crawl a domain list into documents.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Pair documents across the two languages.
    AlignDocs {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        docs: DocArgs,
    },
    /// Align sentences inside document pairs into the raw corpus.
    AlignSents {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sents: SentArgs,
    },
    /// Apply the duplicate, length and overlap rules.
    FilterRules {
        #[command(flatten)]
        common: Common,
    },
    /// Train the random forest on pseudo-parallel positives and crossed negatives.
    TrainFilter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Score the rule-filtered corpus and split it into accepted and rejected.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Recount the artifacts into report.json and report.txt.
    Report {
        #[command(flatten)]
        common: Common,
    },
    /// Run every stage in order.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        dict: DictArgs,
        #[command(flatten)]
        ingest: IngestArgs,
        #[command(flatten)]
        docs: DocArgs,
        #[command(flatten)]
        sents: SentArgs,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Write a synthetic bilingual website snapshot with its ground truth.
    GenFixture(FixtureArgs),
    /// Precision and recall of a mined corpus against true pairs.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Mined corpus; defaults to C.tsv in the output directory.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        truth: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Source language code.
    #[arg(long)]
    src: Option<String>,
    /// Target language code.
    #[arg(long)]
    tgt: Option<String>,
    /// Pseudo-parallel corpus TSV.
    #[arg(long)]
    pseudo: Option<PathBuf>,
}

#[derive(Args)]
struct DictArgs {
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    smoothing: Option<f64>,
    #[arg(long)]
    min_prob: Option<f64>,
    /// Maximum translations kept per source word.
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct IngestArgs {
    /// Hostnames to crawl, one per line.
    #[arg(long, conflicts_with = "snapshot")]
    domains: Option<PathBuf>,
    /// Snapshot directory (or manifest file).
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long)]
    max_pages: Option<usize>,
    /// Link depth of the crawl.
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    delay_ms: Option<u64>,
}

#[derive(Args)]
struct DocArgs {
    /// URL, structure and content weights, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    doc_threshold: Option<f64>,
}

#[derive(Args)]
struct SentArgs {
    /// Seed dictionary to align with instead of the induced one.
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long)]
    dict_weight: Option<f64>,
    #[arg(long)]
    length_weight: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gap_penalty: Option<f64>,
    #[arg(long)]
    accept_threshold: Option<f64>,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    neg_ratio: Option<f64>,
    #[arg(long)]
    trees: Option<usize>,
    /// Depth limit of each tree.
    #[arg(long)]
    tree_depth: Option<usize>,
    #[arg(long)]
    feat_subsample: Option<usize>,
    #[arg(long)]
    cls_threshold: Option<f64>,
}

#[derive(Args)]
struct FixtureArgs {
    /// Directory to write the fixture into.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sites: Option<usize>,
    /// Pages per language per site.
    #[arg(long)]
    pages: Option<usize>,
    /// Sentences per page.
    #[arg(long)]
    sentences: Option<usize>,
    #[arg(long)]
    vocab: Option<usize>,
    #[arg(long)]
    unpaired: Option<f64>,
    #[arg(long)]
    inserted: Option<f64>,
    #[arg(long)]
    near_dup: Option<f64>,
    /// Target word substitution rate of the pseudo corpus.
    #[arg(long)]
    noise: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        set(&mut cfg.out, self.out.clone());
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.workers, self.workers);
        set(&mut cfg.languages.src, self.src.clone());
        set(&mut cfg.languages.tgt, self.tgt.clone());
        if self.pseudo.is_some() {
            cfg.inputs.pseudo = self.pseudo.clone();
        }
        Ok(cfg)
    }
}

impl DictArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        set(&mut cfg.dict.iterations, self.iterations);
        set(&mut cfg.dict.smoothing, self.smoothing);
        set(&mut cfg.dict.min_prob, self.min_prob);
        set(&mut cfg.dict.cap, self.cap);
    }
}

impl IngestArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if self.domains.is_some() {
            cfg.inputs.domains = self.domains.clone();
            cfg.inputs.snapshot = None;
        }
        if self.snapshot.is_some() {
            cfg.inputs.snapshot = self.snapshot.clone();
            cfg.inputs.domains = None;
        }
        set(&mut cfg.crawl.max_pages, self.max_pages);
        set(&mut cfg.crawl.max_depth, self.max_depth);
        set(&mut cfg.crawl.delay_ms, self.delay_ms);
    }
}

impl DocArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(w) = &self.weights {
            cfg.doc_align.weights = [w[0], w[1], w[2]];
        }
        set(&mut cfg.doc_align.threshold, self.doc_threshold);
    }
}

impl SentArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if self.dict.is_some() {
            cfg.inputs.dict = self.dict.clone();
        }
        let p = &mut cfg.sent_align;
        set(&mut p.dict_weight, self.dict_weight);
        set(&mut p.length_weight, self.length_weight);
        set(&mut p.gap_penalty, self.gap_penalty);
        set(&mut p.accept_threshold, self.accept_threshold);
    }
}

impl FilterArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        let f = &mut cfg.filter;
        set(&mut f.neg_ratio, self.neg_ratio);
        set(&mut f.trees, self.trees);
        set(&mut f.max_depth, self.tree_depth);
        set(&mut f.feature_subsample, self.feat_subsample);
        set(&mut f.threshold, self.cls_threshold);
    }
}

fn stage<T: Send>(cfg: PipelineConfig, body: impl FnOnce(&PipelineConfig) -> Result<T> + Send) -> Result<T> {
    cfg.validate()?;
    with_workers(cfg.workers, || body(&cfg))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::InduceDict { common, dict } => {
            let mut cfg = common.config()?;
            dict.apply(&mut cfg);
            let stats = stage(cfg, stages::induce_dict)?;
            println!("seed entries: {} forward, {} reverse", stats.seed_entries, stats.seed_entries_rev);
        }
        Command::Ingest { common, ingest } => {
            let mut cfg = common.config()?;
            ingest.apply(&mut cfg);
            let docs = stage(cfg, stages::ingest)?;
            println!("documents: {}", docs.len());
        }
        Command::AlignDocs { common, docs } => {
            let mut cfg = common.config()?;
            docs.apply(&mut cfg);
            let pairs = stage(cfg, stages::align_docs)?;
            println!("document pairs: {}", pairs.len());
        }
        Command::AlignSents { common, sents } => {
            let mut cfg = common.config()?;
            sents.apply(&mut cfg);
            let raw = stage(cfg, stages::align_sents)?;
            println!("raw pairs: {}", raw.len());
        }
        Command::FilterRules { common } => {
            let r = stage(common.config()?, stages::filter_rules)?;
            println!(
                "kept {} (duplicate {}, short {}, overlap {})",
                r.kept, r.removed_duplicate, r.removed_short, r.removed_overlap
            );
        }
        Command::TrainFilter { common, filter } => {
            let mut cfg = common.config()?;
            filter.apply(&mut cfg);
            let model = stage(cfg, stages::train_filter)?;
            println!("trees: {}", model.trees.len());
        }
        Command::Classify { common, filter } => {
            let mut cfg = common.config()?;
            filter.apply(&mut cfg);
            let (c, rejected) = stage(cfg, stages::classify)?;
            println!("accepted {}, rejected {}", c.len(), rejected.len());
        }
        Command::Report { common } => {
            let r = stage(common.config()?, report::report)?;
            print!("{}", r.to_text());
        }
        Command::Run {
            common,
            dict,
            ingest,
            docs,
            sents,
            filter,
        } => {
            let mut cfg = common.config()?;
            dict.apply(&mut cfg);
            ingest.apply(&mut cfg);
            docs.apply(&mut cfg);
            sents.apply(&mut cfg);
            filter.apply(&mut cfg);
            let r = run_pipeline(&cfg)?;
            print!("{}", r.to_text());
        }
        Command::GenFixture(a) => {
            let mut spec = SyntheticFixtureSpec::default();
            set(&mut spec.seed, a.seed);
            set(&mut spec.sites, a.sites);
            set(&mut spec.pages_per_site, a.pages);
            set(&mut spec.sentences_per_page, a.sentences);
            set(&mut spec.vocab_size, a.vocab);
            set(&mut spec.unpaired_fraction, a.unpaired);
            set(&mut spec.inserted_fraction, a.inserted);
            set(&mut spec.near_duplicate_fraction, a.near_dup);
            set(&mut spec.pseudo_noise, a.noise);
            let s = gen_fixture(&spec, &a.out)?;
            println!("pages: {}, true pairs: {}, config: {}", s.pages, s.truth_pairs, s.config.display());
        }
        Command::Evaluate { common, corpus, truth } => {
            let cfg = common.config()?;
            let langs = cfg.language_pair()?;
            let corpus = corpus.unwrap_or_else(|| cfg.out.join(ACCEPTED));
            let load = |path: &PathBuf| {
                read_corpus(path, CorpusKind::Raw, &langs).map_err(|e| PipelineError::Config(e.to_string()))
            };
            let e = evaluate_against_truth(&load(&corpus)?, &load(&truth)?);
            println!("{}", serde_json::to_string_pretty(&e).expect("serializable"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
