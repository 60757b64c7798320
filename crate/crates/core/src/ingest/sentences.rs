//! Rule-based sentence boundary detection.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lang::Lang;
use crate::text::Sentence;

const TERMINATORS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &['"', '\'', '”', '’', '»', ')', ']'];
const OPENERS: &[char] = &['"', '\'', '“', '‘', '«', '„', '(', '[', '¿', '¡'];

/// Built-in abbreviations (matched case-insensitively, period included).
const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "vs.", "etc.", "e.g.", "i.e.", "inc.", "ltd.", "co.",
    "no.", "nr.", "fig.", "vol.", "p.", "pp.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.",
    "oct.", "nov.", "dec.", "m.", "mme.", "mlle.", "hr.", "fr.", "z.b.", "bzw.", "ca.", "dipl.", "sen.", "gen.",
    "gov.", "rep.", "approx.",
];

/// Splits text blocks at `.`, `!`, `?` followed by whitespace and an
/// uppercase letter or opening quote, except after a listed abbreviation.
#[derive(Clone, Debug)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        SentenceSplitter::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations<'a>(abbrevs: impl IntoIterator<Item = &'a str>) -> Self {
        SentenceSplitter {
            abbreviations: abbrevs.into_iter().map(str::to_lowercase).collect(),
        }
    }

    /// One abbreviation per line; blank lines and `#` comments ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(SentenceSplitter::with_abbreviations(
            text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    /// True if `word` (period included) is a listed abbreviation.
    pub fn is_abbreviation(&self, word: &str) -> bool {
        let word = word.trim_start_matches(OPENERS);
        self.abbreviations.contains(&word.to_lowercase())
    }

    pub fn split(&self, block: &str, lang: &Lang) -> Vec<Sentence> {
        self.split_spans(block)
            .into_iter()
            .map(|s| Sentence::new(s, lang.clone()))
            .collect()
    }

    /// Sentence substrings of `block`, trimmed and non-empty.
    pub fn split_spans<'a>(&self, block: &'a str) -> Vec<&'a str> {
        let chars: Vec<(usize, char)> = block.char_indices().collect();
        let n = chars.len();
        let byte_at = |i: usize| if i < n { chars[i].0 } else { block.len() };
        let mut out = Vec::new();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < n {
            if !TERMINATORS.contains(&chars[i].1) {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < n && TERMINATORS.contains(&chars[j].1) {
                j += 1;
            }
            let mut k = j;
            while k < n && CLOSERS.contains(&chars[k].1) {
                k += 1;
            }
            if k < n && chars[k].1.is_whitespace() {
                let mut m = k;
                while m < n && chars[m].1.is_whitespace() {
                    m += 1;
                }
                let starts_sentence = m < n && (chars[m].1.is_uppercase() || OPENERS.contains(&chars[m].1));
                let lone_period = j == i + 1 && chars[i].1 == '.';
                let abbreviated = lone_period && {
                    let head = &block[byte_at(start)..byte_at(j)];
                    let word = head.rsplit(char::is_whitespace).next().unwrap_or(head);
                    self.is_abbreviation(word)
                };
                if starts_sentence && !abbreviated {
                    push_trimmed(&mut out, &block[byte_at(start)..byte_at(k)]);
                    start = m;
                }
            }
            i = k.max(i + 1);
        }
        push_trimmed(&mut out, &block[byte_at(start)..]);
        out
    }
}

fn push_trimmed<'a>(out: &mut Vec<&'a str>, s: &'a str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s);
    }
}

/// Splits with the built-in abbreviation list.
pub fn split_sentences(block: &str, lang: &Lang) -> Vec<Sentence> {
    SentenceSplitter::default().split(block, lang)
}
