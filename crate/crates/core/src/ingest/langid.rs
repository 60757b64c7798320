//! Character-trigram language identification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lang::Lang;

/// Texts shorter than this (in characters) are never classified.
pub const MIN_CHARS: usize = 20;
/// Minimum normalized margin between the best and second-best profile.
pub const MIN_MARGIN: f64 = 0.05;

/// Relative trigram frequencies of one language.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigramProfile {
    counts: BTreeMap<String, f64>,
    norm: f64,
}

impl TrigramProfile {
    pub fn from_text(text: &str) -> Self {
        let mut profile = TrigramProfile::default();
        profile.add(text);
        profile.finish();
        profile
    }

    fn add(&mut self, text: &str) {
        for tri in trigrams(text) {
            *self.counts.entry(tri).or_default() += 1.0;
        }
    }

    fn finish(&mut self) {
        self.norm = self.counts.values().map(|c| c * c).sum::<f64>().sqrt();
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn cosine(&self, other: &TrigramProfile) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: f64 = small
            .counts
            .iter()
            .filter_map(|(k, a)| large.counts.get(k).map(|b| a * b))
            .sum();
        (dot / (self.norm * other.norm)).clamp(0.0, 1.0)
    }
}

/// Lowercased letter trigrams; every run of non-letters acts as one space and
/// the text is padded with a space on both sides.
fn trigrams(text: &str) -> Vec<String> {
    let mut chars = vec![' '];
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphabetic() {
            chars.push(c);
        } else if chars.last() != Some(&' ') {
            chars.push(' ');
        }
    }
    if chars.last() != Some(&' ') {
        chars.push(' ');
    }
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    /// `None` when the text is too short or the decision too close.
    pub lang: Option<Lang>,
    pub confidence: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LanguageProfiles {
    profiles: BTreeMap<Lang, TrigramProfile>,
}

impl LanguageProfiles {
    /// Trains one profile per language from sample texts.
    pub fn train<'a>(samples: impl IntoIterator<Item = (&'a Lang, &'a str)>) -> Self {
        let mut profiles: BTreeMap<Lang, TrigramProfile> = BTreeMap::new();
        for (lang, text) in samples {
            profiles.entry(lang.clone()).or_default().add(text);
        }
        for p in profiles.values_mut() {
            p.finish();
        }
        LanguageProfiles { profiles }
    }

    pub fn insert(&mut self, lang: Lang, profile: TrigramProfile) {
        self.profiles.insert(lang, profile);
    }

    pub fn languages(&self) -> impl Iterator<Item = &Lang> {
        self.profiles.keys()
    }

    pub fn get(&self, lang: &Lang) -> Option<&TrigramProfile> {
        self.profiles.get(lang)
    }

    /// Argmax of cosine similarity, with confidence `(best - second) / best`.
    pub fn detect(&self, text: &str) -> Detection {
        let unknown = |confidence| Detection { lang: None, confidence };
        if text.trim().chars().count() < MIN_CHARS || self.profiles.is_empty() {
            return unknown(0.0);
        }
        let sample = TrigramProfile::from_text(text);
        let mut best: Option<(&Lang, f64)> = None;
        let mut second = 0.0f64;
        for (lang, profile) in &self.profiles {
            let sim = sample.cosine(profile);
            match best {
                Some((_, b)) if sim <= b => second = second.max(sim),
                Some((_, b)) => {
                    second = b;
                    best = Some((lang, sim));
                }
                None => best = Some((lang, sim)),
            }
        }
        let Some((lang, top)) = best else {
            return unknown(0.0);
        };
        if top <= 0.0 {
            return unknown(0.0);
        }
        let margin = ((top - second) / top).clamp(0.0, 1.0);
        if margin < MIN_MARGIN {
            return unknown(margin);
        }
        Detection {
            lang: Some(lang.clone()),
            confidence: margin,
        }
    }

    /// Confidence that `text` is in `expected`: the detection margin when the
    /// detector agrees, zero otherwise.
    pub fn confidence_for(&self, text: &str, expected: &Lang) -> f64 {
        let d = self.detect(text);
        if d.lang.as_ref() == Some(expected) {
            d.confidence
        } else {
            0.0
        }
    }
}

/// Free-function form of [`LanguageProfiles::detect`].
pub fn detect_language(text: &str, profiles: &LanguageProfiles) -> Detection {
    profiles.detect(text)
}
