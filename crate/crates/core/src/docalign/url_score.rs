use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::edit::normalized_edit_distance;
use crate::error::{Error, Result};
use crate::lang::{Lang, LanguagePair};

const BUILTIN_ALIASES: &str = include_str!("../../data/lang_aliases.tsv");

/// Placeholder substituted for language tokens in URLs.
pub const LANG_PLACEHOLDER: &str = "{L}";

/// Spellings of each language that appear in URLs: ISO-639-1/3 codes,
/// English and native names, locale variants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageAliases {
    by_code: BTreeMap<String, BTreeSet<String>>,
}

impl Default for LanguageAliases {
    fn default() -> Self {
        let mut a = LanguageAliases { by_code: BTreeMap::new() };
        a.merge_tsv(BUILTIN_ALIASES);
        a
    }
}

impl LanguageAliases {
    /// Built-in table extended with the entries of `path`
    /// (`code <TAB> alias,alias,...` per line).
    pub fn with_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut a = LanguageAliases::default();
        a.merge_tsv(&text);
        Ok(a)
    }

    fn merge_tsv(&mut self, text: &str) {
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (code, rest) = line.split_once('\t').unwrap_or((line, ""));
            let set = self.by_code.entry(code.trim().to_lowercase()).or_default();
            set.extend(rest.split(',').map(|s| s.trim().to_lowercase()).filter(|s| !s.is_empty()));
        }
    }

    /// Lowercase tokens naming `lang`, its code included.
    pub fn tokens(&self, lang: &Lang) -> BTreeSet<String> {
        let mut set = self.by_code.get(lang.as_str()).cloned().unwrap_or_default();
        set.insert(lang.as_str().to_string());
        set
    }

    pub fn pair_tokens(&self, pair: &LanguagePair) -> BTreeSet<String> {
        let mut set = self.tokens(pair.src());
        set.extend(self.tokens(pair.tgt()));
        set
    }
}

/// A URL with language tokens replaced.
#[derive(Debug, PartialEq, Eq)]
struct NormalizedUrl {
    /// Path without the leading slash, plus `?query` when present.
    path: String,
    had_language_token: bool,
}

fn parse_loose(url: &str) -> Option<url::Url> {
    let url = url.trim();
    if url.contains("://") {
        url::Url::parse(url).ok()
    } else {
        url::Url::parse(&format!("http://{url}")).ok()
    }
}

fn normalize(url: &str, tokens: &BTreeSet<String>) -> Option<NormalizedUrl> {
    let parsed = parse_loose(url)?;
    let mut found = false;
    let mut swap = |seg: &str| -> String {
        if tokens.contains(&seg.to_lowercase()) {
            found = true;
            LANG_PLACEHOLDER.to_string()
        } else {
            seg.to_string()
        }
    };
    let path = parsed.path().trim_start_matches('/');
    let mut out: Vec<String> = path.split('/').map(&mut swap).collect::<Vec<_>>();
    let mut path = out.join("/");
    if let Some(q) = parsed.query() {
        out = q
            .split('&')
            .map(|kv| match kv.split_once('=') {
                Some((k, v)) => format!("{}={}", swap(k), swap(v)),
                None => swap(kv),
            })
            .collect();
        path.push('?');
        path.push_str(&out.join("&"));
    }
    let host_token = parsed
        .host_str()
        .is_some_and(|h| h.split('.').any(|label| tokens.contains(&label.to_lowercase())));
    Some(NormalizedUrl {
        path,
        had_language_token: found || host_token,
    })
}

/// URL similarity after masking language tokens of either side of `pair`:
/// one minus the normalized character edit distance of the masked paths.
/// Zero when neither URL names a language and the URLs differ, or when a URL
/// cannot be parsed.
pub fn url_match_score(url_a: &str, url_b: &str, pair: &LanguagePair, aliases: &LanguageAliases) -> f64 {
    let tokens = aliases.pair_tokens(pair);
    url_match_score_with(url_a, url_b, &tokens)
}

pub(crate) fn url_match_score_with(url_a: &str, url_b: &str, tokens: &BTreeSet<String>) -> f64 {
    let (Some(a), Some(b)) = (normalize(url_a, tokens), normalize(url_b, tokens)) else {
        return 0.0;
    };
    if !a.had_language_token && !b.had_language_token && url_a != url_b {
        return 0.0;
    }
    let ca: Vec<char> = a.path.chars().collect();
    let cb: Vec<char> = b.path.chars().collect();
    1.0 - normalized_edit_distance(&ca, &cb)
}
