use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::rules::overlap_ratio;
use crate::corpus::SentencePair;
use crate::dict::SeedDictionary;
use crate::error::{Error, Result};
use crate::ingest::LanguageProfiles;
use crate::lang::LanguagePair;
use crate::sentalign::dict_coverage;
use crate::text::Sentence;

pub const N_FEATURES: usize = 12;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "src_len",
    "tgt_len",
    "len_ratio",
    "dict_cov_st",
    "dict_cov_ts",
    "overlap_ratio",
    "digit_jaccard",
    "punct_ratio_diff",
    "uppercase_ratio_diff",
    "mean_token_len_diff",
    "langid_conf_src",
    "langid_conf_tgt",
];

/// Per-pair features, in the order of [`FEATURE_NAMES`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; N_FEATURES] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|k| self.0[k])
    }
}

/// Dictionaries and language profiles the features are computed against.
#[derive(Clone, Copy, Debug)]
pub struct FeatureExtractor<'a> {
    pub languages: &'a LanguagePair,
    pub seed_st: &'a SeedDictionary,
    pub seed_ts: &'a SeedDictionary,
    /// Without profiles both language-ID features are 0.
    pub profiles: Option<&'a LanguageProfiles>,
}

fn is_numeral(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit()) && token.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',')
}

fn numerals(s: &Sentence) -> BTreeSet<&str> {
    s.tokens().iter().map(String::as_str).filter(|t| is_numeral(t)).collect()
}

fn ratio(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64
    }
}

fn punct_ratio(text: &str) -> f64 {
    let visible: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    ratio(visible.iter().filter(|c| !c.is_alphanumeric()).count(), visible.len())
}

fn uppercase_ratio(text: &str) -> f64 {
    let letters: Vec<char> = text.chars().filter(|c| c.is_alphabetic()).collect();
    ratio(letters.iter().filter(|c| c.is_uppercase()).count(), letters.len())
}

fn mean_token_len(s: &Sentence) -> f64 {
    let chars: usize = s.tokens().iter().map(|t| t.chars().count()).sum();
    ratio(chars, s.len())
}

impl FeatureExtractor<'_> {
    pub fn extract(&self, pair: &SentencePair) -> Result<FeatureVector> {
        let (src, tgt) = (&pair.src, &pair.tgt);
        if src.is_empty() || tgt.is_empty() {
            return Err(Error::invalid("features of a pair with an empty side"));
        }
        let (ls, lt) = (src.len(), tgt.len());
        let (ns, nt) = (numerals(src), numerals(tgt));
        let digit_jaccard = if ns.is_empty() && nt.is_empty() {
            1.0
        } else {
            ratio(ns.intersection(&nt).count(), ns.union(&nt).count())
        };
        let (conf_src, conf_tgt) = match self.profiles {
            Some(p) => (
                p.confidence_for(src.text(), self.languages.src()),
                p.confidence_for(tgt.text(), self.languages.tgt()),
            ),
            None => (0.0, 0.0),
        };
        Ok(FeatureVector([
            ls as f64,
            lt as f64,
            ls.min(lt) as f64 / ls.max(lt) as f64,
            dict_coverage(src, tgt, self.seed_st),
            dict_coverage(tgt, src, self.seed_ts),
            overlap_ratio(src, tgt)?,
            digit_jaccard,
            (punct_ratio(src.text()) - punct_ratio(tgt.text())).abs(),
            (uppercase_ratio(src.text()) - uppercase_ratio(tgt.text())).abs(),
            (mean_token_len(src) - mean_token_len(tgt)).abs(),
            conf_src,
            conf_tgt,
        ]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Provenance;
    use crate::lang::Lang;

    #[test]
    fn identical_sides_with_identity_dictionaries() {
        let langs = LanguagePair::parse("xx", "yy").unwrap();
        let src = Sentence::new("the cat sat on 12 mats", Lang::new("xx").unwrap());
        let tgt = Sentence::new("the cat sat on 12 mats", Lang::new("yy").unwrap());
        let id = SeedDictionary::identity(src.tokens().iter().map(String::as_str));
        let fx = FeatureExtractor { languages: &langs, seed_st: &id, seed_ts: &id, profiles: None };
        let f = fx.extract(&SentencePair::new(src, tgt, Provenance::Crawled)).unwrap();
        assert_eq!(f.get("len_ratio"), Some(1.0));
        assert_eq!(f.get("overlap_ratio"), Some(1.0));
        assert_eq!(f.get("dict_cov_st"), Some(1.0));
        assert_eq!(f.get("dict_cov_ts"), Some(1.0));
        assert_eq!(f.get("digit_jaccard"), Some(1.0));
        assert!(f.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn disjoint_numerals() {
        let langs = LanguagePair::parse("xx", "yy").unwrap();
        let d = SeedDictionary::from_entries([]);
        let fx = FeatureExtractor { languages: &langs, seed_st: &d, seed_ts: &d, profiles: None };
        let p = SentencePair::new(
            Sentence::new("in 2020 it", Lang::new("xx").unwrap()),
            Sentence::new("en 1999 il", Lang::new("yy").unwrap()),
            Provenance::Crawled,
        );
        assert_eq!(fx.extract(&p).unwrap().get("digit_jaccard"), Some(0.0));
        let empty = SentencePair::new(
            Sentence::new("", Lang::new("xx").unwrap()),
            Sentence::new("en", Lang::new("yy").unwrap()),
            Provenance::Crawled,
        );
        assert!(fx.extract(&empty).is_err());
    }
}
