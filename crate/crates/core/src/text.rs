//! Tokenization and the `Sentence` value type.

use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::lang::Lang;

/// Splits text into lowercased tokens.
///
/// Segmentation follows Unicode word boundaries: words and numerals
/// (`3.14`, `1,000`) stay whole, each punctuation mark becomes its own token
/// and whitespace is dropped. The language is accepted for interface symmetry;
/// the rules are language independent.
pub fn tokenize(text: &str, _lang: &Lang) -> Vec<String> {
    tokenize_str(text)
}

pub(crate) fn tokenize_str(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split_word_bounds()
        // A combining mark may attach to a preceding space; tokens never keep whitespace.
        .flat_map(str::split_whitespace)
        .map(str::to_string)
        .collect()
}

/// Collapses whitespace runs into single spaces and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A sentence and its tokenization. The token list is always derived from the
/// text; there is no way to construct one inconsistently.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SentenceRepr", from = "SentenceRepr")]
pub struct Sentence {
    text: String,
    tokens: Vec<String>,
    lang: Lang,
}

impl Sentence {
    /// Line breaks in `text` are replaced by spaces.
    pub fn new(text: &str, lang: Lang) -> Self {
        let text = if text.contains(['\n', '\r']) {
            text.replace(['\n', '\r'], " ")
        } else {
            text.to_string()
        };
        let tokens = tokenize(&text, &lang);
        Sentence { text, tokens, lang }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn lang(&self) -> &Lang {
        &self.lang
    }

    /// Length in tokens.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct SentenceRepr {
    text: String,
    lang: Lang,
}

impl From<Sentence> for SentenceRepr {
    fn from(s: Sentence) -> Self {
        SentenceRepr {
            text: s.text,
            lang: s.lang,
        }
    }
}

impl From<SentenceRepr> for Sentence {
    fn from(r: SentenceRepr) -> Self {
        Sentence::new(&r.text, r.lang)
    }
}
