//! Breadth-first, same-host crawler with robots support and a fixed delay
//! between requests.

use std::collections::{HashSet, VecDeque};
use std::io::Read;
use std::time::{Duration, Instant};

use url::Url;

use crate::error::{Error, Result};
use crate::ingest::document::{DocumentBuilder, FetchStatus, WebDocument};
use crate::ingest::html;
use crate::ingest::robots::RobotsRules;

pub const USER_AGENT: &str = "bitext-miner/0.1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrawlLimits {
    pub max_pages: usize,
    pub max_depth: usize,
    pub delay_ms: u64,
}

impl Default for CrawlLimits {
    fn default() -> Self {
        CrawlLimits {
            max_pages: 200,
            max_depth: 4,
            delay_ms: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FetchResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

/// Retrieves one URL. Transport failures are reported as `Err(message)`.
pub trait Fetcher {
    fn fetch(&mut self, url: &Url) -> std::result::Result<FetchResponse, String>;
}

/// Time source used to space requests.
pub trait Clock {
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    start: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { start: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.start.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Blocking HTTP(S) fetcher.
pub struct HttpFetcher {
    agent: ureq::Agent,
    max_body: u64,
}

impl Default for HttpFetcher {
    fn default() -> Self {
        HttpFetcher::new(Duration::from_secs(30))
    }
}

impl HttpFetcher {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .user_agent(USER_AGENT)
            .build()
            .into();
        HttpFetcher {
            agent,
            max_body: 8 * 1024 * 1024,
        }
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&mut self, url: &Url) -> std::result::Result<FetchResponse, String> {
        let mut resp = self.agent.get(url.as_str()).call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let content_type = resp
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let mut body = Vec::new();
        resp.body_mut()
            .as_reader()
            .take(self.max_body)
            .read_to_end(&mut body)
            .map_err(|e| e.to_string())?;
        Ok(FetchResponse {
            status,
            content_type,
            body,
        })
    }
}

fn is_html(content_type: Option<&str>) -> bool {
    content_type.is_none_or(|ct| {
        let ct = ct.to_ascii_lowercase();
        ct.starts_with("text/html") || ct.starts_with("application/xhtml")
    })
}

struct Polite<'a, C: Clock> {
    clock: &'a C,
    delay: Duration,
    last: Option<Duration>,
}

impl<C: Clock> Polite<'_, C> {
    fn wait(&mut self) {
        if let Some(last) = self.last {
            let elapsed = self.clock.now().saturating_sub(last);
            if elapsed < self.delay {
                self.clock.sleep(self.delay - elapsed);
            }
        }
        self.last = Some(self.clock.now());
    }
}

/// Crawls `domain` breadth-first from its root page.
///
/// Links found on a page are queued after everything discovered earlier,
/// sorted by URL among themselves. Failed pages are returned with
/// [`FetchStatus::Failed`]; non-HTML responses are skipped. Errors only when
/// no page at all could be fetched.
pub fn fetch_domain<F: Fetcher, C: Clock>(
    domain: &str,
    scheme: &str,
    limits: CrawlLimits,
    fetcher: &mut F,
    clock: &C,
    builder: &DocumentBuilder,
) -> Result<Vec<WebDocument>> {
    if limits.max_pages == 0 {
        return Err(Error::invalid("max_pages must be positive"));
    }
    let root = Url::parse(&format!("{scheme}://{domain}/")).map_err(|e| Error::invalid(format!("domain {domain:?}: {e}")))?;
    let host = root.host_str().unwrap_or_default().to_string();
    let mut polite = Polite {
        clock,
        delay: Duration::from_millis(limits.delay_ms),
        last: None,
    };

    polite.wait();
    let robots = match root.join("/robots.txt").ok().map(|u| fetcher.fetch(&u)) {
        Some(Ok(resp)) if (200..300).contains(&resp.status) => {
            RobotsRules::parse(&String::from_utf8_lossy(&resp.body), USER_AGENT)
        }
        _ => RobotsRules::allow_all(),
    };

    let mut queue: VecDeque<(Url, usize)> = VecDeque::from([(root.clone(), 0)]);
    let mut seen: HashSet<String> = HashSet::from([root.to_string()]);
    let mut docs = Vec::new();
    while let Some((url, depth)) = queue.pop_front() {
        if docs.len() >= limits.max_pages {
            break;
        }
        if !robots.is_allowed(url.path()) {
            continue;
        }
        polite.wait();
        let resp = match fetcher.fetch(&url) {
            Ok(r) if (200..300).contains(&r.status) => r,
            _ => {
                docs.push(WebDocument::failed(url.as_str()));
                continue;
            }
        };
        if !is_html(resp.content_type.as_deref()) {
            continue;
        }
        if depth < limits.max_depth {
            let mut found: Vec<Url> = html::scan(&resp.body)
                .links
                .iter()
                .filter_map(|href| url.join(href.trim()).ok())
                .filter(|u| matches!(u.scheme(), "http" | "https") && u.host_str() == Some(host.as_str()))
                .map(|mut u| {
                    u.set_fragment(None);
                    u
                })
                .filter(|u| !seen.contains(u.as_str()))
                .collect();
            found.sort_by(|a, b| a.as_str().cmp(b.as_str()));
            found.dedup();
            for u in found {
                seen.insert(u.to_string());
                queue.push_back((u, depth + 1));
            }
        }
        docs.push(builder.build(url.as_str(), resp.body, FetchStatus::Fetched));
    }
    if docs.iter().all(|d| d.fetch_status == FetchStatus::Failed) {
        return Err(Error::NothingFetched(domain.to_string()));
    }
    Ok(docs)
}
