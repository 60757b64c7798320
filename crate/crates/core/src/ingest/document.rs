use serde::{Deserialize, Serialize};

use crate::ingest::html;
use crate::ingest::langid::LanguageProfiles;
use crate::ingest::sentences::SentenceSplitter;
use crate::lang::Lang;
use crate::text::Sentence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FetchStatus {
    Fetched,
    FromSnapshot,
    Failed,
}

/// A web page after text extraction and language identification.
///
/// Sentences come only from `text_blocks` and are produced only when the
/// page language is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WebDocument {
    pub url: String,
    #[serde(skip)]
    pub raw_html: Vec<u8>,
    pub text_blocks: Vec<String>,
    pub sentences: Vec<Sentence>,
    pub lang: Option<Lang>,
    pub lang_confidence: f64,
    pub tag_signature: Vec<String>,
    pub fetch_status: FetchStatus,
}

impl WebDocument {
    pub fn failed(url: &str) -> Self {
        WebDocument {
            url: url.to_string(),
            raw_html: Vec::new(),
            text_blocks: Vec::new(),
            sentences: Vec::new(),
            lang: None,
            lang_confidence: 0.0,
            tag_signature: Vec::new(),
            fetch_status: FetchStatus::Failed,
        }
    }

    /// Host part of the URL, or an empty string when it has none.
    pub fn domain(&self) -> String {
        host_of(&self.url)
    }

    /// All sentence tokens in document order.
    pub fn tokens(&self) -> impl Iterator<Item = &String> {
        self.sentences.iter().flat_map(|s| s.tokens())
    }
}

pub(crate) fn host_of(url: &str) -> String {
    let with_scheme = if url.contains("://") {
        url.to_string()
    } else {
        format!("http://{url}")
    };
    url::Url::parse(&with_scheme)
        .ok()
        .and_then(|u| u.host_str().map(str::to_string))
        .unwrap_or_default()
}

/// Turns raw HTML into a [`WebDocument`].
#[derive(Clone, Debug, Default)]
pub struct DocumentBuilder {
    pub splitter: SentenceSplitter,
    /// Without profiles every document stays language-unknown.
    pub profiles: Option<LanguageProfiles>,
}

impl DocumentBuilder {
    pub fn new(splitter: SentenceSplitter, profiles: Option<LanguageProfiles>) -> Self {
        DocumentBuilder { splitter, profiles }
    }

    pub fn build(&self, url: &str, raw_html: Vec<u8>, status: FetchStatus) -> WebDocument {
        let (text_blocks, tag_signature) = html::extract_text(&raw_html);
        let detection = self
            .profiles
            .as_ref()
            .map(|p| p.detect(&text_blocks.join(" ")));
        let (lang, lang_confidence) = match detection {
            Some(d) => (d.lang, d.confidence),
            None => (None, 0.0),
        };
        let sentences = match &lang {
            Some(l) => text_blocks.iter().flat_map(|b| self.splitter.split(b, l)).collect(),
            None => Vec::new(),
        };
        WebDocument {
            url: url.to_string(),
            raw_html,
            text_blocks,
            sentences,
            lang,
            lang_confidence,
            tag_signature,
            fetch_status: status,
        }
    }
}
