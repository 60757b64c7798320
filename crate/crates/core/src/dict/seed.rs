use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::dict::ibm1::{ProbabilisticDictionary, NULL_TOKEN};
use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct SeedEntry {
    pub src: String,
    pub tgt: String,
    pub prob: f64,
}

/// Discrete word-translation lexicon consumed by document and sentence
/// alignment. Candidates for one source word are kept in descending
/// probability order, ties by target word.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeedDictionary {
    rows: BTreeMap<String, Vec<(String, f64)>>,
    cap: usize,
}

impl SeedDictionary {
    /// Builds a dictionary from arbitrary entries; rows are re-sorted and the
    /// cap becomes the longest row.
    pub fn from_entries(entries: impl IntoIterator<Item = SeedEntry>) -> Self {
        let mut rows: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        for e in entries {
            rows.entry(e.src).or_default().push((e.tgt, e.prob));
        }
        for row in rows.values_mut() {
            sort_candidates(row);
            row.dedup_by(|a, b| a.0 == b.0);
        }
        let cap = rows.values().map(Vec::len).max().unwrap_or(0);
        SeedDictionary { rows, cap }
    }

    /// Every token translates to itself with probability one.
    pub fn identity<'a>(tokens: impl IntoIterator<Item = &'a str>) -> Self {
        SeedDictionary::from_entries(tokens.into_iter().map(|t| SeedEntry {
            src: t.to_string(),
            tgt: t.to_string(),
            prob: 1.0,
        }))
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn contains(&self, src: &str, tgt: &str) -> bool {
        self.rows.get(src).is_some_and(|row| row.iter().any(|(t, _)| t == tgt))
    }

    /// Most probable translation of `src`.
    pub fn top1(&self, src: &str) -> Option<&str> {
        self.rows.get(src).and_then(|row| row.first()).map(|(t, _)| t.as_str())
    }

    pub fn candidates(&self, src: &str) -> &[(String, f64)] {
        self.rows.get(src).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Entries sorted by (source, descending probability, target).
    pub fn entries(&self) -> impl Iterator<Item = SeedEntry> + '_ {
        self.rows.iter().flat_map(|(s, row)| {
            row.iter().map(move |(t, p)| SeedEntry {
                src: s.clone(),
                tgt: t.clone(),
                prob: *p,
            })
        })
    }

    pub fn len(&self) -> usize {
        self.rows.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_triples(path, self.entries().map(|e| (e.src, e.tgt, e.prob)))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            let cols: Vec<&str> = line.split('\t').collect();
            let [src, tgt, prob] = cols[..] else {
                return Err(Error::format(path, idx + 1, format!("expected 3 columns, found {}", cols.len())));
            };
            let prob: f64 = prob
                .parse()
                .ok()
                .filter(|p| (0.0..=1.0).contains(p))
                .ok_or_else(|| Error::format(path, idx + 1, format!("bad probability {prob:?}")))?;
            entries.push(SeedEntry {
                src: src.to_string(),
                tgt: tgt.to_string(),
                prob,
            });
        }
        Ok(SeedDictionary::from_entries(entries))
    }
}

fn sort_candidates(row: &mut [(String, f64)]) {
    row.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

fn write_triples(path: &Path, rows: impl Iterator<Item = (String, String, f64)>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for (s, t, p) in rows {
        writeln!(out, "{s}\t{t}\t{p}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Thresholds a probabilistic table into a seed dictionary: every
/// `(s, t, t(t|s))` with probability at least `min_prob`, at most `cap` per
/// source word, `NULL` excluded.
pub fn extract_seed<F: Real>(pdict: &ProbabilisticDictionary<F>, min_prob: f64, cap: usize) -> Result<SeedDictionary> {
    if !(min_prob > 0.0 && min_prob <= 1.0) {
        return Err(Error::invalid(format!("min_prob must be in (0,1], got {min_prob}")));
    }
    if cap == 0 {
        return Err(Error::invalid("cap must be >= 1"));
    }
    let mut rows = BTreeMap::new();
    for src in pdict.src_vocab() {
        if src == NULL_TOKEN {
            continue;
        }
        let explicit = pdict.row(src);
        let mut cands: Vec<(String, f64)> = explicit
            .iter()
            .map(|(t, p)| (t.to_string(), p.as_f64()))
            .filter(|(_, p)| *p >= min_prob)
            .collect();
        let floor = pdict.row_floor(src).map(Real::as_f64).unwrap_or(0.0);
        if floor > 0.0 && floor >= min_prob {
            let listed: std::collections::HashSet<&str> = explicit.iter().map(|(t, _)| *t).collect();
            cands.extend(
                pdict
                    .tgt_vocab()
                    .iter()
                    .filter(|t| !listed.contains(t.as_str()))
                    .map(|t| (t.clone(), floor)),
            );
        }
        if cands.is_empty() {
            continue;
        }
        sort_candidates(&mut cands);
        cands.truncate(cap);
        rows.insert(src.clone(), cands);
    }
    Ok(SeedDictionary { rows, cap })
}

/// Persists the explicit entries of a probabilistic table, `NULL` row
/// included, in the seed dictionary format.
pub fn write_table<F: Real>(pdict: &ProbabilisticDictionary<F>, path: &Path) -> Result<()> {
    let mut srcs: Vec<&String> = pdict.src_vocab().iter().collect();
    srcs.sort();
    let mut lines = Vec::new();
    for src in srcs {
        let mut row: Vec<(String, f64)> = pdict.row(src).into_iter().map(|(t, p)| (t.to_string(), p.as_f64())).collect();
        sort_candidates(&mut row);
        lines.extend(row.into_iter().map(|(t, p)| (src.clone(), t, p)));
    }
    write_triples(path, lines.into_iter())
}
