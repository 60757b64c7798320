use std::collections::HashSet;

use bitext_core::filter::{
    classify_corpus, extract_all, gen_negatives, heuristic_filter, train_forest, FeatureExtractor, FeatureVector,
    ForestModel, ForestParams, RemovalReason, N_FEATURES,
};
use bitext_core::{Corpus, CorpusKind, Lang, LanguagePair, Provenance, PseudoParallelCorpus, SeedDictionary, Sentence, SentencePair};
use bitext_core::dict::SeedEntry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn langs() -> LanguagePair {
    LanguagePair::parse("xx", "yy").unwrap()
}

fn pair(a: &str, b: &str) -> SentencePair {
    SentencePair::new(Sentence::new(a, Lang::new("xx").unwrap()), Sentence::new(b, Lang::new("yy").unwrap()), Provenance::Crawled)
}

fn raw(pairs: Vec<SentencePair>) -> Corpus {
    Corpus::from_pairs(CorpusKind::Raw, langs(), pairs).unwrap()
}

#[test]
fn heuristic_boundaries() {
    let c = raw(vec![
        pair("aa bb cc dd", "ww xx yy zz"),
        pair("aa bb cc dd", "ww xx yy zz"),
        pair("aa bb cc", "ww xx yy zz"),
        pair("aa bb cc dd", "ww xx yy"),
        pair("a b c d", "a b x y"),
        pair("a b c d e f g", "a b c d x y z"),
    ]);
    let out = heuristic_filter(&c);
    let reasons: Vec<RemovalReason> = out.removed.iter().map(|(_, r)| *r).collect();
    assert_eq!(
        reasons,
        [RemovalReason::Duplicate, RemovalReason::Short, RemovalReason::Short, RemovalReason::Overlap]
    );
    assert_eq!(out.kept.pairs()[0], c.pairs()[0]);
    assert_eq!(out.kept.pairs()[1], c.pairs()[4]);
    let r = out.report;
    assert_eq!((r.kept, r.removed_duplicate, r.removed_short, r.removed_overlap), (2, 1, 2, 1));
    assert_eq!(r.input(), c.len());
    let again = heuristic_filter(&out.kept);
    assert_eq!(again.kept.pairs(), out.kept.pairs());
    assert!(again.removed.is_empty());
}

#[test]
fn random_corpora_reconcile_and_are_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let words = ["a", "b", "c", "d", "e", "f", "g"];
    for _ in 0..50 {
        let mut pairs = Vec::new();
        for _ in 0..rng.random_range(0..40) {
            let mut side = || {
                let n = rng.random_range(1..7);
                (0..n).map(|_| words[rng.random_range(0..words.len())]).collect::<Vec<_>>().join(" ")
            };
            let (a, b) = (side(), side());
            pairs.push(pair(&a, &b));
        }
        let c = raw(pairs);
        let out = heuristic_filter(&c);
        assert_eq!(out.report.input(), c.len());
        assert_eq!(out.report.kept + out.removed.len(), c.len());
        assert!(heuristic_filter(&out.kept).removed.is_empty());
    }
}

fn pseudo(pairs: Vec<SentencePair>) -> PseudoParallelCorpus {
    PseudoParallelCorpus::new(Corpus::from_pairs(CorpusKind::Pseudo, langs(), pairs).unwrap()).unwrap()
}

/// Sentences over a synthetic vocabulary and their word-by-word cipher.
fn cipher_pairs(rng: &mut ChaCha8Rng, n: usize, vocab: usize) -> Vec<SentencePair> {
    (0..n)
        .map(|_| {
            let len = rng.random_range(5..=12);
            let ids: Vec<usize> = (0..len).map(|_| rng.random_range(0..vocab)).collect();
            let s: Vec<String> = ids.iter().map(|k| format!("s{k}")).collect();
            let t: Vec<String> = ids.iter().map(|k| format!("t{k}")).collect();
            pair(&s.join(" "), &t.join(" "))
        })
        .collect()
}

fn cipher_dicts(vocab: usize) -> (SeedDictionary, SeedDictionary) {
    let st = SeedDictionary::from_entries((0..vocab).map(|k| SeedEntry { src: format!("s{k}"), tgt: format!("t{k}"), prob: 1.0 }));
    let ts = SeedDictionary::from_entries((0..vocab).map(|k| SeedEntry { src: format!("t{k}"), tgt: format!("s{k}"), prob: 1.0 }));
    (st, ts)
}

#[test]
fn negatives_are_crossed_and_seeded() {
    let two = pseudo(vec![pair("a b", "x y"), pair("c d", "z w")]);
    let negs = gen_negatives(&two, 1.0, 5).unwrap();
    assert_eq!(negs.len(), 2);
    for n in &negs {
        let k = n.text_key();
        assert!(k == ("a b".into(), "z w".into()) || k == ("c d".into(), "x y".into()));
        assert_eq!(n.provenance, Provenance::Synthetic);
    }
    assert!(gen_negatives(&pseudo(vec![pair("a", "b")]), 1.0, 0).is_err());
    assert!(gen_negatives(&two, 0.0, 0).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = pseudo(cipher_pairs(&mut rng, 1000, 300));
    let negs = gen_negatives(&a, 1.0, 9).unwrap();
    assert_eq!(negs.len(), 1000);
    let truth: HashSet<_> = a.pairs().iter().map(SentencePair::text_key).collect();
    assert_eq!(negs.iter().filter(|n| truth.contains(&n.text_key())).count(), 0);
    assert_eq!(negs, gen_negatives(&a, 1.0, 9).unwrap());
    assert_ne!(negs, gen_negatives(&a, 1.0, 10).unwrap());
    assert_eq!(gen_negatives(&a, 0.25, 9).unwrap().len(), 250);
}

fn toy(first: f64, rest: f64) -> FeatureVector {
    let mut v = [rest; N_FEATURES];
    v[0] = first;
    FeatureVector(v)
}

#[test]
fn separable_toy_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pos: Vec<FeatureVector> = (0..40).map(|_| toy(rng.random_range(0.8..1.0), rng.random())).collect();
    let neg: Vec<FeatureVector> = (0..40).map(|_| toy(rng.random_range(0.0..0.2), rng.random())).collect();
    let params = ForestParams { n_trees: 8, max_depth: 3, feature_subsample: 4 };
    let model: ForestModel<f64> = train_forest(&pos, &neg, params, 3).unwrap();
    assert!(pos.iter().all(|f| model.score(f) >= 0.5));
    assert!(neg.iter().all(|f| model.score(f) < 0.5));
    assert!(model.score(&toy(0.9, 0.5)) > 0.5);
    model.validate().unwrap();

    let again: ForestModel<f64> = train_forest(&pos, &neg, params, 3).unwrap();
    assert_eq!(model.to_text(), again.to_text());

    let single: ForestModel<f64> = train_forest(&[toy(1.0, 0.0)], &[toy(0.0, 0.0)], params, 4).unwrap();
    assert!(single.score(&toy(1.0, 0.0)) >= 0.5);
    assert!(single.score(&toy(0.0, 0.0)) < 0.5);
}

#[test]
fn model_file_round_trip_and_tree_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sample = |rng: &mut ChaCha8Rng, shift: f64| FeatureVector(std::array::from_fn(|_| rng.random::<f64>() + shift));
    let pos: Vec<_> = (0..200).map(|_| sample(&mut rng, 0.3)).collect();
    let neg: Vec<_> = (0..200).map(|_| sample(&mut rng, 0.0)).collect();
    let params = ForestParams { n_trees: 20, max_depth: 6, feature_subsample: 4 };
    let dir = tempfile::tempdir().unwrap();
    let probe: Vec<_> = (0..100).map(|_| sample(&mut rng, 0.15)).collect();

    let m64: ForestModel<f64> = train_forest(&pos, &neg, params, 7).unwrap();
    let path = dir.path().join("m64");
    m64.write(&path).unwrap();
    let back = ForestModel::<f64>::read(&path).unwrap();
    assert_eq!(back, m64);
    assert_eq!(back.to_text(), m64.to_text());

    let mut shuffled = m64.clone();
    shuffled.trees.reverse();
    shuffled.trees.swap(3, 11);
    let reread = ForestModel::<f64>::from_text(&shuffled.to_text()).unwrap();
    for f in &probe {
        assert_eq!(m64.score(f).to_bits(), reread.score(f).to_bits());
    }

    let m32: ForestModel<f32> = train_forest(&pos, &neg, params, 7).unwrap();
    let back32 = ForestModel::<f32>::from_text(&m32.to_text()).unwrap();
    assert_eq!(back32, m32);
    for f in &probe {
        assert_eq!(m32.score(f).to_bits(), back32.score(f).to_bits());
    }
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half.
fn roc_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for p in pos {
        for n in neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

#[test]
fn classifier_separates_cipher_pairs_from_crossed_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let vocab = 400;
    let all = cipher_pairs(&mut rng, 1250, vocab);
    let (st, ts) = cipher_dicts(vocab);
    let l = langs();
    let fx = FeatureExtractor { languages: &l, seed_st: &st, seed_ts: &ts, profiles: None };
    let a = pseudo(all);
    let negs = gen_negatives(&a, 1.0, 21).unwrap();
    let pos = extract_all(a.pairs(), &fx).unwrap();
    let neg = extract_all(&negs, &fx).unwrap();
    let cut = pos.len() * 4 / 5;
    let params = ForestParams { n_trees: 30, max_depth: 8, feature_subsample: 4 };
    let model: ForestModel<f64> = train_forest(&pos[..cut], &neg[..cut], params, 5).unwrap();
    let sp: Vec<f64> = pos[cut..].iter().map(|f| model.score(f)).collect();
    let sn: Vec<f64> = neg[cut..].iter().map(|f| model.score(f)).collect();
    assert!(roc_auc(&sp, &sn) >= 0.95);

    let mut mixed = a.pairs()[cut..].to_vec();
    mixed.extend(negs[cut..].iter().cloned());
    let b = raw(mixed);
    let (c, rejected) = classify_corpus(&b, &model, 0.5, &fx).unwrap();
    assert_eq!(c.len() + rejected.len(), b.len());
    let truth: HashSet<_> = a.pairs()[cut..].iter().map(SentencePair::text_key).collect();
    let true_in_c = c.pairs().iter().filter(|p| truth.contains(&p.text_key())).count();
    let neg_in_r = rejected.pairs().iter().filter(|p| !truth.contains(&p.text_key())).count();
    assert!(true_in_c as f64 >= 0.95 * truth.len() as f64);
    assert!(neg_in_r as f64 >= 0.95 * (b.len() - truth.len()) as f64);
    assert!(c.pairs().iter().all(|p| p.score().unwrap() >= 0.5));
    assert!(rejected.pairs().iter().all(|p| p.score().unwrap() < 0.5));

    let (all_c, none) = classify_corpus(&b, &model, 0.0, &fx).unwrap();
    assert_eq!(all_c.len(), b.len());
    assert!(none.is_empty());
    let (top, _) = classify_corpus(&b, &model, 1.0, &fx).unwrap();
    assert!(top.pairs().iter().all(|p| p.score() == Some(1.0)));
    assert!(classify_corpus(&b, &model, 1.5, &fx).is_err());
}
