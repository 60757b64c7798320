use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::time::Duration;

use bitext_core::ingest::{
    fetch_domain, Clock, CrawlLimits, DocumentBuilder, FetchResponse, FetchStatus, Fetcher, HttpFetcher, SystemClock,
};
use bitext_core::Error;
use url::Url;

/// Serves pages from a map; time advances 5 ms per request.
struct FakeSite<'c> {
    pages: BTreeMap<String, String>,
    clock: &'c FakeClock,
    requests: Vec<(String, Duration)>,
}

impl Fetcher for FakeSite<'_> {
    fn fetch(&mut self, url: &Url) -> Result<FetchResponse, String> {
        self.requests.push((url.to_string(), self.clock.now()));
        self.clock.advance(Duration::from_millis(5));
        match self.pages.get(url.as_str()) {
            Some(body) => Ok(FetchResponse {
                status: 200,
                content_type: Some(if url.path() == "/robots.txt" { "text/plain" } else { "text/html" }.into()),
                body: body.clone().into_bytes(),
            }),
            None if url.path() == "/dead" => Err("connection refused".into()),
            None => Ok(FetchResponse {
                status: 404,
                content_type: None,
                body: Vec::new(),
            }),
        }
    }
}

#[derive(Default)]
struct FakeClock {
    now: Cell<Duration>,
    slept: RefCell<Vec<Duration>>,
}

impl FakeClock {
    fn advance(&self, d: Duration) {
        self.now.set(self.now.get() + d);
    }
}

impl Clock for FakeClock {
    fn now(&self) -> Duration {
        self.now.get()
    }

    fn sleep(&self, d: Duration) {
        self.slept.borrow_mut().push(d);
        self.advance(d);
    }
}

fn three_pages() -> BTreeMap<String, String> {
    BTreeMap::from([
        (
            "http://site.test/".to_string(),
            r#"<p>Home</p><a href="/b.html">b</a><a href="a.html#top">a</a><a href="http://elsewhere.test/x">x</a>"#.to_string(),
        ),
        ("http://site.test/a.html".to_string(), r#"<p>A</p><a href="/">home</a><a href="/b.html">b</a>"#.to_string()),
        ("http://site.test/b.html".to_string(), r#"<p>B</p><a href="/a.html">a</a>"#.to_string()),
    ])
}

fn limits(max_pages: usize) -> CrawlLimits {
    CrawlLimits {
        max_pages,
        max_depth: 3,
        delay_ms: 100,
    }
}

#[test]
fn crawls_interlinked_pages_in_bfs_order() {
    let clock = FakeClock::default();
    let mut site = FakeSite { pages: three_pages(), clock: &clock, requests: Vec::new() };
    let docs = fetch_domain("site.test", "http", limits(10), &mut site, &clock, &DocumentBuilder::default()).unwrap();
    let urls: Vec<&str> = docs.iter().map(|d| d.url.as_str()).collect();
    assert_eq!(urls, ["http://site.test/", "http://site.test/a.html", "http://site.test/b.html"]);
    assert!(docs.iter().all(|d| d.fetch_status == FetchStatus::Fetched));
    assert_eq!(docs[1].text_blocks, ["A", "homeb"]);
    assert!(!site.requests.iter().any(|(u, _)| u.contains("elsewhere")));
}

#[test]
fn max_pages_is_enforced() {
    let clock = FakeClock::default();
    let mut site = FakeSite { pages: three_pages(), clock: &clock, requests: Vec::new() };
    let docs = fetch_domain("site.test", "http", limits(1), &mut site, &clock, &DocumentBuilder::default()).unwrap();
    assert_eq!(docs.len(), 1);
}

#[test]
fn max_depth_stops_link_expansion() {
    let clock = FakeClock::default();
    let mut site = FakeSite { pages: three_pages(), clock: &clock, requests: Vec::new() };
    let l = CrawlLimits { max_depth: 0, ..limits(10) };
    let docs = fetch_domain("site.test", "http", l, &mut site, &clock, &DocumentBuilder::default()).unwrap();
    assert_eq!(docs.len(), 1);
}

#[test]
fn robots_disallowing_everything_fetches_nothing() {
    let clock = FakeClock::default();
    let mut pages = three_pages();
    pages.insert("http://site.test/robots.txt".into(), "User-agent: *\nDisallow: /\n".into());
    let mut site = FakeSite { pages, clock: &clock, requests: Vec::new() };
    let r = fetch_domain("site.test", "http", limits(10), &mut site, &clock, &DocumentBuilder::default());
    assert!(matches!(r, Err(Error::NothingFetched(_))));
    assert_eq!(site.requests.len(), 1, "only robots.txt requested");
}

#[test]
fn robots_partial_disallow_skips_pages() {
    let clock = FakeClock::default();
    let mut pages = three_pages();
    pages.insert("http://site.test/robots.txt".into(), "User-agent: *\nDisallow: /a.html\n".into());
    let mut site = FakeSite { pages, clock: &clock, requests: Vec::new() };
    let docs = fetch_domain("site.test", "http", limits(10), &mut site, &clock, &DocumentBuilder::default()).unwrap();
    assert_eq!(docs.len(), 2);
    assert!(docs.iter().all(|d| !d.url.ends_with("a.html")));
}

#[test]
fn failed_pages_are_reported_not_fatal() {
    let clock = FakeClock::default();
    let mut pages = three_pages();
    pages.insert(
        "http://site.test/".into(),
        r#"<a href="/dead">d</a><a href="/missing">m</a><a href="/a.html">a</a>"#.into(),
    );
    let mut site = FakeSite { pages, clock: &clock, requests: Vec::new() };
    let docs = fetch_domain("site.test", "http", limits(10), &mut site, &clock, &DocumentBuilder::default()).unwrap();
    let failed: Vec<&str> = docs
        .iter()
        .filter(|d| d.fetch_status == FetchStatus::Failed)
        .map(|d| d.url.as_str())
        .collect();
    assert_eq!(failed, ["http://site.test/dead", "http://site.test/missing"]);
}

#[test]
fn unreachable_domain_is_an_error() {
    let clock = FakeClock::default();
    let mut site = FakeSite { pages: BTreeMap::new(), clock: &clock, requests: Vec::new() };
    let r = fetch_domain("site.test", "http", limits(10), &mut site, &clock, &DocumentBuilder::default());
    assert!(matches!(r, Err(Error::NothingFetched(_))));
}

#[test]
fn requests_are_spaced_by_the_delay() {
    let clock = FakeClock::default();
    let mut site = FakeSite { pages: three_pages(), clock: &clock, requests: Vec::new() };
    fetch_domain("site.test", "http", limits(10), &mut site, &clock, &DocumentBuilder::default()).unwrap();
    assert_eq!(site.requests.len(), 4);
    for w in site.requests.windows(2) {
        assert!(w[1].1 - w[0].1 >= Duration::from_millis(100), "{:?}", site.requests);
    }
    assert!(clock.slept.borrow().iter().all(|d| *d == Duration::from_millis(95)));
}

#[test]
fn http_fetcher_against_local_server() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        for _ in 0..3 {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                if h == "\r\n" || h.is_empty() {
                    break;
                }
            }
            let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
            let (status, body) = match path.as_str() {
                "/" => ("200 OK", r#"<html><body><p>Root page.</p><a href="/next">n</a></body></html>"#),
                "/next" => ("200 OK", "<p>Next page.</p>"),
                _ => ("404 Not Found", ""),
            };
            write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: text/html; charset=utf-8\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    let mut fetcher = HttpFetcher::new(Duration::from_secs(5));
    let clock = SystemClock::default();
    let l = CrawlLimits { max_pages: 5, max_depth: 2, delay_ms: 1 };
    let docs = fetch_domain(&addr.to_string(), "http", l, &mut fetcher, &clock, &DocumentBuilder::default()).unwrap();
    server.join().unwrap();
    assert_eq!(docs.len(), 2);
    assert_eq!(docs[0].text_blocks, ["Root page.", "n"]);
    assert_eq!(docs[1].text_blocks, ["Next page."]);
}
