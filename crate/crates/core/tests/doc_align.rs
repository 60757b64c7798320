use bitext_core::dict::{SeedDictionary, SeedEntry};
use bitext_core::docalign::{
    align_documents, greedy_match, url_match_score, Candidate, DocWeights, LanguageAliases,
};
use bitext_core::ingest::{FetchStatus, WebDocument};
use bitext_core::{Lang, LanguagePair, Sentence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Re-implements the greedy rule by repeated arg-max over the pairs that are
/// still available, without sorting.
fn brute_greedy(totals: &[Vec<f64>], src_urls: &[String], tgt_urls: &[String], threshold: f64) -> Vec<(usize, usize)> {
    let mut free_s = vec![true; totals.len()];
    let mut free_t = vec![true; tgt_urls.len()];
    let mut out = Vec::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in totals.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                if !free_s[i] || !free_t[j] || t < threshold {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bj)) => {
                        let bt = totals[bi][bj];
                        t > bt || (t == bt && (&src_urls[i], &tgt_urls[j]) < (&src_urls[bi], &tgt_urls[bj]))
                    }
                };
                if better {
                    best = Some((i, j));
                }
            }
        }
        match best {
            Some((i, j)) => {
                free_s[i] = false;
                free_t[j] = false;
                out.push((i, j));
            }
            None => return out,
        }
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<String>, Vec<String>) {
    let n = rng.random_range(0..=6);
    let m = rng.random_range(0..=6);
    // Coarse grid so that ties are frequent.
    let totals = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(0..=10) as f64 / 10.0).collect())
        .collect();
    let mut pick = |side: &str| -> String { format!("s{}.example/{side}/{}", rng.random_range(0..3), rng.random_range(0..100)) };
    let src: Vec<String> = (0..n).map(|_| pick("fr")).collect();
    let tgt: Vec<String> = (0..m).map(|_| pick("en")).collect();
    (totals, src, tgt)
}

fn candidates(totals: &[Vec<f64>]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (i, row) in totals.iter().enumerate() {
        for (j, &total) in row.iter().enumerate() {
            out.push(Candidate {
                src: i,
                tgt: j,
                url_score: 0.0,
                structure_score: 0.0,
                content_score: 0.0,
                total,
            });
        }
    }
    out
}

#[test]
fn greedy_matches_brute_force_up_to_six_by_six() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..2000 {
        let (totals, src, tgt) = random_instance(&mut rng);
        let threshold = rng.random_range(0..=10) as f64 / 10.0;
        let s: Vec<&str> = src.iter().map(String::as_str).collect();
        let t: Vec<&str> = tgt.iter().map(String::as_str).collect();
        let got: Vec<(usize, usize)> = greedy_match(&candidates(&totals), &s, &t, threshold)
            .iter()
            .map(|c| (c.src, c.tgt))
            .collect();
        assert_eq!(got, brute_greedy(&totals, &src, &tgt, threshold), "{totals:?} {src:?} {tgt:?}");
    }
}

#[test]
fn raising_threshold_never_adds_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let (totals, src, tgt) = random_instance(&mut rng);
        let s: Vec<&str> = src.iter().map(String::as_str).collect();
        let t: Vec<&str> = tgt.iter().map(String::as_str).collect();
        let cands = candidates(&totals);
        let mut prev = usize::MAX;
        for k in 0..=20 {
            let n = greedy_match(&cands, &s, &t, k as f64 / 20.0).len();
            assert!(n <= prev);
            prev = n;
        }
    }
}

#[test]
fn language_segment_urls() {
    let pair = LanguagePair::parse("en", "de").unwrap();
    let aliases = LanguageAliases::default();
    assert_eq!(url_match_score("xx.com/abc/en", "xx.com/abc/de", &pair, &aliases), 1.0);
    assert_eq!(url_match_score("xx.com/a", "yy.com/totally/other", &pair, &aliases), 0.0);
}

fn page(url: &str, lang: &str, text: &str) -> WebDocument {
    let lang = Lang::new(lang).unwrap();
    WebDocument {
        url: url.into(),
        raw_html: Vec::new(),
        text_blocks: vec![text.into()],
        sentences: vec![Sentence::new(text, lang.clone())],
        lang: Some(lang),
        lang_confidence: 1.0,
        tag_signature: vec!["html".into(), "body".into(), "p".into()],
        fetch_status: FetchStatus::FromSnapshot,
    }
}

#[test]
fn twins_are_paired_one_to_one() {
    let pair = LanguagePair::parse("fr", "en").unwrap();
    let seed = SeedDictionary::from_entries(
        [("chat", "cat"), ("chien", "dog"), ("maison", "house"), ("le", "the")]
            .iter()
            .map(|(s, t)| SeedEntry { src: s.to_string(), tgt: t.to_string(), prob: 1.0 }),
    );
    let p = [
        page("http://a.example/fr/1.html", "fr", "le chat"),
        page("http://a.example/fr/2.html", "fr", "le chien"),
        page("http://a.example/fr/3.html", "fr", "la maison"),
    ];
    let q = [
        page("http://a.example/en/2.html", "en", "the dog"),
        page("http://a.example/en/1.html", "en", "the cat"),
        page("http://a.example/en/3.html", "en", "the house"),
    ];
    let pairs = align_documents(&p, &q, &pair, &seed, DocWeights::default(), 0.5).unwrap();
    let urls: Vec<(&str, &str)> = pairs.iter().map(|d| (d.src_doc.url.as_str(), d.tgt_doc.url.as_str())).collect();
    let mut urls_sorted = urls.clone();
    urls_sorted.sort();
    assert_eq!(
        urls_sorted,
        [
            ("http://a.example/fr/1.html", "http://a.example/en/1.html"),
            ("http://a.example/fr/2.html", "http://a.example/en/2.html"),
            ("http://a.example/fr/3.html", "http://a.example/en/3.html"),
        ]
    );
    for d in &pairs {
        let w = DocWeights::default();
        let expect = w.url * d.url_score + w.structure * d.structure_score + w.content * d.content_score;
        assert!((d.total - expect).abs() < 1e-12);
    }
}
