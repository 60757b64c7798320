use std::fs;
use std::path::{Path, PathBuf};

use bitext_core::docalign::DocWeights;
use bitext_core::filter::ForestParams;
use bitext_core::ingest::{CrawlLimits, MANIFEST_FILE};
use bitext_core::sentalign::AlignParams;
use bitext_core::{dict, LanguagePair};
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Languages {
    pub src: String,
    pub tgt: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    /// Pseudo-parallel corpus TSV.
    pub pseudo: Option<PathBuf>,
    /// Snapshot directory holding a manifest.
    pub snapshot: Option<PathBuf>,
    /// Hostnames to crawl, one per line.
    pub domains: Option<PathBuf>,
    /// Seed dictionary used by sentence alignment instead of the induced one.
    pub dict: Option<PathBuf>,
    /// Extra language aliases for URL matching.
    pub aliases: Option<PathBuf>,
    /// Abbreviation list for the sentence splitter.
    pub abbreviations: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DictConfig {
    pub iterations: usize,
    pub smoothing: f64,
    pub min_prob: f64,
    pub cap: usize,
}

impl Default for DictConfig {
    fn default() -> Self {
        DictConfig {
            iterations: dict::DEFAULT_ITERATIONS,
            smoothing: dict::DEFAULT_SMOOTHING,
            min_prob: dict::DEFAULT_MIN_PROB,
            cap: dict::DEFAULT_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrawlConfig {
    pub max_pages: usize,
    pub max_depth: usize,
    pub delay_ms: u64,
    pub timeout_ms: u64,
    pub scheme: String,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        let l = CrawlLimits::default();
        CrawlConfig {
            max_pages: l.max_pages,
            max_depth: l.max_depth,
            delay_ms: l.delay_ms,
            timeout_ms: 20_000,
            scheme: "https".into(),
        }
    }
}

impl CrawlConfig {
    pub fn limits(&self) -> CrawlLimits {
        CrawlLimits {
            max_pages: self.max_pages,
            max_depth: self.max_depth,
            delay_ms: self.delay_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DocAlignConfig {
    /// URL, structure and content weights.
    pub weights: [f64; 3],
    pub threshold: f64,
}

impl Default for DocAlignConfig {
    fn default() -> Self {
        let w = DocWeights::default();
        DocAlignConfig {
            weights: [w.url, w.structure, w.content],
            threshold: 0.5,
        }
    }
}

impl DocAlignConfig {
    pub fn weights(&self) -> DocWeights {
        DocWeights {
            url: self.weights[0],
            structure: self.weights[1],
            content: self.weights[2],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub neg_ratio: f64,
    pub trees: usize,
    pub max_depth: usize,
    pub feature_subsample: usize,
    pub threshold: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        let f = ForestParams::default();
        FilterConfig {
            neg_ratio: bitext_core::filter::DEFAULT_NEG_RATIO,
            trees: f.n_trees,
            max_depth: f.max_depth,
            feature_subsample: f.feature_subsample,
            threshold: bitext_core::filter::DEFAULT_THRESHOLD,
        }
    }
}

impl FilterConfig {
    pub fn forest(&self) -> ForestParams {
        ForestParams {
            n_trees: self.trees,
            max_depth: self.max_depth,
            feature_subsample: self.feature_subsample,
        }
    }
}

/// Everything a pipeline run needs. Relative paths in a config file are
/// resolved against the file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub languages: Languages,
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    pub out: PathBuf,
    pub inputs: Inputs,
    pub dict: DictConfig,
    pub crawl: CrawlConfig,
    pub doc_align: DocAlignConfig,
    pub sent_align: AlignParams,
    pub filter: FilterConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            languages: Languages::default(),
            seed: 0,
            workers: 0,
            out: PathBuf::from("out"),
            inputs: Inputs::default(),
            dict: DictConfig::default(),
            crawl: CrawlConfig::default(),
            doc_align: DocAlignConfig::default(),
            sent_align: AlignParams::default(),
            filter: FilterConfig::default(),
        }
    }
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(PipelineError::Config(msg()))
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let inputs = &mut cfg.inputs;
        for p in [
            &mut inputs.pseudo,
            &mut inputs.snapshot,
            &mut inputs.domains,
            &mut inputs.dict,
            &mut inputs.aliases,
            &mut inputs.abbreviations,
        ] {
            rebase(base, p);
        }
        if cfg.out.is_relative() {
            cfg.out = base.join(&cfg.out);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn language_pair(&self) -> Result<LanguagePair> {
        LanguagePair::parse(&self.languages.src, &self.languages.tgt)
            .map_err(|e| PipelineError::Config(format!("languages: {e}")))
    }

    pub fn manifest(&self) -> Option<PathBuf> {
        self.inputs.snapshot.as_ref().map(|d| {
            if d.is_file() {
                d.clone()
            } else {
                d.join(MANIFEST_FILE)
            }
        })
    }

    /// Checks value ranges and that every configured input exists.
    pub fn validate(&self) -> Result<()> {
        self.language_pair()?;
        let i = &self.inputs;
        for (name, p) in [
            ("pseudo", &i.pseudo),
            ("domains", &i.domains),
            ("dict", &i.dict),
            ("aliases", &i.aliases),
            ("abbreviations", &i.abbreviations),
        ] {
            if let Some(p) = p {
                check(p.is_file(), || format!("{name} input {} does not exist", p.display()))?;
            }
        }
        if let Some(m) = self.manifest() {
            check(m.is_file(), || format!("snapshot manifest {} does not exist", m.display()))?;
        }
        check(i.snapshot.is_none() || i.domains.is_none(), || "give either a snapshot or a domain list, not both".into())?;
        let d = &self.dict;
        check(d.iterations >= 1, || "dict.iterations must be >= 1".into())?;
        check(d.smoothing.is_finite() && d.smoothing >= 0.0, || "dict.smoothing must be >= 0".into())?;
        check((0.0..=1.0).contains(&d.min_prob), || "dict.min_prob must lie in [0,1]".into())?;
        check(d.cap >= 1, || "dict.cap must be >= 1".into())?;
        let c = &self.crawl;
        check(c.max_pages >= 1, || "crawl.max_pages must be >= 1".into())?;
        check(c.scheme == "http" || c.scheme == "https", || "crawl.scheme must be http or https".into())?;
        self.doc_align.weights().validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        check((0.0..=1.0).contains(&self.doc_align.threshold), || "doc_align.threshold must lie in [0,1]".into())?;
        self.sent_align.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        let f = &self.filter;
        check(f.neg_ratio.is_finite() && f.neg_ratio > 0.0, || "filter.neg_ratio must be > 0".into())?;
        f.forest().validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        check((0.0..=1.0).contains(&f.threshold), || "filter.threshold must lie in [0,1]".into())?;
        Ok(())
    }

    /// Validation for a full run, which also needs the pseudo corpus and a
    /// page source.
    pub fn validate_for_run(&self) -> Result<()> {
        self.validate()?;
        check(self.inputs.pseudo.is_some(), || "inputs.pseudo is required".into())?;
        check(self.inputs.snapshot.is_some() || self.inputs.domains.is_some(), || {
            "inputs.snapshot or inputs.domains is required".into()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let mut cfg = PipelineConfig::default();
        cfg.languages = Languages { src: "fr".into(), tgt: "en".into() };
        let text = cfg.to_toml();
        let back = PipelineConfig::from_toml(&text, Path::new("/")).unwrap();
        assert_eq!(back.sent_align, cfg.sent_align);
        assert_eq!(back.filter, cfg.filter);
        back.validate().unwrap();
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let cfg = PipelineConfig::from_toml(
            "out = \"o\"\n[languages]\nsrc = \"fr\"\ntgt = \"en\"\n[inputs]\npseudo = \"a.tsv\"\n",
            Path::new("/base"),
        )
        .unwrap();
        assert_eq!(cfg.inputs.pseudo.as_deref(), Some(Path::new("/base/a.tsv")));
        assert_eq!(cfg.out, Path::new("/base/o"));
    }

    #[test]
    fn invalid_values_rejected() {
        let base = "[languages]\nsrc = \"fr\"\ntgt = \"en\"\n";
        for extra in [
            "[doc_align]\nweights = [0.5, 0.5, 0.5]\n",
            "[filter]\nthreshold = 1.5\n",
            "[sent_align]\ngap_penalty = 0.2\n",
            "[inputs]\npseudo = \"/does/not/exist.tsv\"\n",
            "[dict]\niterations = 0\n",
        ] {
            let cfg = PipelineConfig::from_toml(&format!("{base}{extra}"), Path::new("/")).unwrap();
            assert!(matches!(cfg.validate(), Err(PipelineError::Config(_))), "{extra}");
        }
        assert!(PipelineConfig::from_toml("bogus = 1\n", Path::new("/")).is_err());
        let same = PipelineConfig::from_toml("[languages]\nsrc = \"fr\"\ntgt = \"fr\"\n", Path::new("/")).unwrap();
        assert!(same.validate().is_err());
    }
}
