//! Page acquisition (live crawl or snapshot), text extraction, language
//! identification and sentence splitting.

mod crawl;
mod document;
pub mod html;
pub mod langid;
mod robots;
pub mod sentences;
mod snapshot;

pub use crawl::{fetch_domain, Clock, CrawlLimits, FetchResponse, Fetcher, HttpFetcher, SystemClock, USER_AGENT};
pub use document::{DocumentBuilder, FetchStatus, WebDocument};
pub use html::extract_text;
pub use langid::{detect_language, Detection, LanguageProfiles, TrigramProfile};
pub use robots::RobotsRules;
pub use sentences::{split_sentences, SentenceSplitter};
pub use snapshot::{load_snapshot, ManifestEntry, SnapshotManifest, MANIFEST_FILE};
