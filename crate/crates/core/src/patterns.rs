//! Arrival-pattern encoding of comment threads.
//!
//! The pattern of a thread replaces each comment author by an ID code: `0`
//! for the original poster, and `j` for the `j`-th distinct non-poster
//! commenter in order of first appearance. The focused exchange
//! Mary/Mary,Don,Pat,Don,Pat encodes as `0,1,2,1,2`; a guestbook-style thread
//! in which four friends congratulate James and James replies encodes as
//! `1,2,3,4,0`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{Corpus, Thread};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("code {code} at position {position} appears before code {missing}")]
    OutOfOrder { position: usize, code: u32, missing: u32 },
    #[error("prefix length {requested} exceeds pattern length {len}")]
    PrefixTooLong { requested: usize, len: usize },
    #[error("ID code {code} does not occur in the first {prefix_len} codes")]
    CodeAbsent { code: u32, prefix_len: usize },
    #[error("prefix length must be at least 2, got {0}")]
    PrefixTooShort(usize),
    #[error("no threads of length >= {0}")]
    NoEligibleThreads(usize),
    #[error("cannot parse pattern {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, PatternError>;

/// A sequence of ID codes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrivalPattern(Vec<u32>);

impl ArrivalPattern {
    /// Validates that new commenters are numbered in arrival order.
    pub fn new(codes: Vec<u32>) -> Result<Self> {
        let mut max_seen = 0u32;
        for (i, &code) in codes.iter().enumerate() {
            if code > max_seen + 1 {
                return Err(PatternError::OutOfOrder {
                    position: i + 1,
                    code,
                    missing: max_seen + 1,
                });
            }
            max_seen = max_seen.max(code);
        }
        Ok(Self(codes))
    }

    /// Caller guarantees the arrival-order invariant.
    pub(crate) fn from_codes_unchecked(codes: Vec<u32>) -> Self {
        debug_assert!(Self::new(codes.clone()).is_ok(), "invalid pattern {codes:?}");
        Self(codes)
    }

    /// Encodes the comment authors of `thread`.
    pub fn encode(thread: &Thread) -> Self {
        let mut ranks: HashMap<&str, u32> = HashMap::new();
        let codes = thread
            .comments
            .iter()
            .map(|c| {
                if c.author_id == thread.poster_id {
                    0
                } else {
                    let next = ranks.len() as u32 + 1;
                    *ranks.entry(c.author_id.as_str()).or_insert(next)
                }
            })
            .collect();
        Self(codes)
    }

    pub fn codes(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct non-poster commenters.
    pub fn max_code(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// The first `k` codes.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k > self.0.len() {
            return Err(PatternError::PrefixTooLong {
                requested: k,
                len: self.0.len(),
            });
        }
        Ok(Self(self.0[..k].to_vec()))
    }

    /// Distinct participants. With `include_poster` the poster counts even if
    /// they never comment, so the value lies in `1..=len + 1`.
    pub fn distinct_participants(&self, include_poster: bool) -> usize {
        // Arrival ordering makes the distinct non-zero codes exactly 1..=max.
        self.max_code() as usize + usize::from(include_poster)
    }

    /// Whether `code`, present among the first `prefix_len` codes, occurs
    /// again after them.
    pub fn reentry_label(&self, prefix_len: usize, code: u32) -> Result<bool> {
        if prefix_len > self.0.len() {
            return Err(PatternError::PrefixTooLong {
                requested: prefix_len,
                len: self.0.len(),
            });
        }
        if !self.0[..prefix_len].contains(&code) {
            return Err(PatternError::CodeAbsent { code, prefix_len });
        }
        Ok(self.0[prefix_len..].contains(&code))
    }

    /// Order-erased code counts.
    pub fn bin(&self) -> PatternBin {
        let mut counts = BTreeMap::new();
        for &c in &self.0 {
            *counts.entry(c).or_insert(0) += 1;
        }
        PatternBin(counts)
    }
}

impl fmt::Display for ArrivalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for ArrivalPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::default());
        }
        let codes = s
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| PatternError::Parse(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(codes)
    }
}

/// Free-function form of [`ArrivalPattern::encode`].
pub fn encode_arrival_pattern(thread: &Thread) -> ArrivalPattern {
    ArrivalPattern::encode(thread)
}

/// Multiset of ID-code counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternBin(BTreeMap<u32, usize>);

impl PatternBin {
    pub fn count(&self, code: u32) -> usize {
        self.0.get(&code).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<u32, usize> {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

impl fmt::Display for PatternBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (code, n)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "#{code}:{n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternStatsRow {
    /// Pattern (`1,0,1,0,1`) or bin (`#0:2 #1:3`).
    pub key: String,
    /// Fraction of threads with this prefix in which code 1 comments again;
    /// `None` when the prefix does not contain code 1.
    pub reentry_rate: Option<f64>,
    /// Fraction of all threads of length >= prefix length with this prefix.
    pub occurrence_share: f64,
    pub threads: usize,
}

/// Per-prefix re-entry statistics for ID code 1, sorted by rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternStats {
    pub prefix_len: usize,
    pub binned: bool,
    pub eligible_threads: usize,
    pub rows: Vec<PatternStatsRow>,
}

impl PatternStats {
    pub fn row(&self, key: &str) -> Option<&PatternStatsRow> {
        self.rows.iter().find(|r| r.key == key)
    }

    /// CSV with columns `key,reentry_rate,occurrence_share`.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["key", "reentry_rate", "occurrence_share"])?;
        for r in &self.rows {
            let rate = r.reentry_rate.map(|x| format!("{x:.6}")).unwrap_or_default();
            w.write_record([r.key.clone(), rate, format!("{:.6}", r.occurrence_share)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Re-entry statistics over a corpus. See [`pattern_reentry_stats_from_patterns`].
pub fn pattern_reentry_stats(corpus: &Corpus, prefix_len: usize, binned: bool) -> Result<PatternStats> {
    let patterns: Vec<ArrivalPattern> = corpus.threads().iter().map(ArrivalPattern::encode).collect();
    pattern_reentry_stats_from_patterns(&patterns, prefix_len, binned)
}

/// Groups patterns of length >= `prefix_len` by their prefix (or its bin).
///
/// Occurrence shares use every such pattern; re-entry rates use only those
/// whose prefix contains code 1.
pub fn pattern_reentry_stats_from_patterns(
    patterns: &[ArrivalPattern],
    prefix_len: usize,
    binned: bool,
) -> Result<PatternStats> {
    if prefix_len < 2 {
        return Err(PatternError::PrefixTooShort(prefix_len));
    }
    // key -> (threads, reentries)
    let mut groups: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut eligible = 0usize;
    for p in patterns.iter().filter(|p| p.len() >= prefix_len) {
        eligible += 1;
        let prefix = p.prefix(prefix_len)?;
        let key = if binned {
            prefix.bin().to_string()
        } else {
            prefix.to_string()
        };
        let entry = groups.entry(key).or_default();
        entry.0 += 1;
        if p.reentry_label(prefix_len, 1).unwrap_or(false) {
            entry.1 += 1;
        }
    }
    if eligible == 0 {
        return Err(PatternError::NoEligibleThreads(prefix_len));
    }
    let mut rows: Vec<PatternStatsRow> = groups
        .into_iter()
        .map(|(key, (threads, reentries))| {
            let has_code_one = if binned {
                key.split(' ').any(|part| part.starts_with("#1:"))
            } else {
                key.split(',').any(|c| c == "1")
            };
            PatternStatsRow {
                reentry_rate: has_code_one.then(|| reentries as f64 / threads as f64),
                occurrence_share: threads as f64 / eligible as f64,
                threads,
                key,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        let rate = |r: &PatternStatsRow| r.reentry_rate.unwrap_or(-1.0);
        rate(b)
            .total_cmp(&rate(a))
            .then(b.occurrence_share.total_cmp(&a.occurrence_share))
            .then_with(|| a.key.cmp(&b.key))
    });
    Ok(PatternStats {
        prefix_len,
        binned,
        eligible_threads: eligible,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::thread;

    fn pat(s: &str) -> ArrivalPattern {
        s.parse().unwrap()
    }

    #[test]
    fn focused_example_encodes() {
        let t = thread("t", "Mary", &["Mary", "Don", "Pat", "Don", "Pat"]);
        assert_eq!(ArrivalPattern::encode(&t).to_string(), "0,1,2,1,2");
    }

    #[test]
    fn expansionary_example_encodes() {
        let t = thread("t", "James", &["Dina", "Fred", "Mia", "Moe", "James"]);
        assert_eq!(ArrivalPattern::encode(&t).to_string(), "1,2,3,4,0");
    }

    #[test]
    fn poster_only_thread_is_all_zero() {
        let t = thread("t", "p", &["p", "p", "p"]);
        assert_eq!(ArrivalPattern::encode(&t).codes(), &[0, 0, 0]);
    }

    #[test]
    fn prefixes() {
        assert_eq!(pat("0,1,2,1,2").prefix(2).unwrap(), pat("0,1"));
        assert_eq!(pat("1,2,3,4,0").prefix(2).unwrap(), pat("1,2"));
        let p = pat("1,0,1");
        assert_eq!(p.prefix(3).unwrap(), p);
        assert_eq!(p.prefix(4), Err(PatternError::PrefixTooLong { requested: 4, len: 3 }));
    }

    #[test]
    fn distinct_participant_counts() {
        assert_eq!(pat("0,0,0").distinct_participants(true), 1);
        assert_eq!(pat("1,2,3,4,5").distinct_participants(true), 6);
        assert_eq!(pat("0,1,2,1,2").distinct_participants(true), 3);
        assert_eq!(pat("0,1,2,1,2").distinct_participants(false), 2);
    }

    #[test]
    fn reentry_labels() {
        assert_eq!(pat("0,1,2,1,2").reentry_label(3, 1), Ok(true));
        assert_eq!(pat("1,2,3,4,0").reentry_label(4, 1), Ok(false));
        assert_eq!(
            pat("1,0,1").reentry_label(3, 2),
            Err(PatternError::CodeAbsent { code: 2, prefix_len: 3 })
        );
    }

    #[test]
    fn bins() {
        assert_eq!(pat("1,0,1,0,1").bin().to_string(), "#0:2 #1:3");
        assert_eq!(pat("1,0,1,0,0").bin().to_string(), "#0:3 #1:2");
        assert_eq!(pat("1,2,3,4,5").bin().to_string(), "#1:1 #2:1 #3:1 #4:1 #5:1");
    }

    #[test]
    fn invalid_code_order_rejected() {
        assert!(ArrivalPattern::new(vec![2, 1]).is_err());
        assert!(ArrivalPattern::new(vec![0, 1, 3]).is_err());
        assert!(ArrivalPattern::new(vec![0, 1, 0, 2]).is_ok());
    }

    #[test]
    fn two_thread_stats() {
        let stats = pattern_reentry_stats_from_patterns(&[pat("0,1,2,1,2"), pat("1,2,3,4,0")], 5, false).unwrap();
        assert_eq!(stats.rows.len(), 2);
        for r in &stats.rows {
            assert_eq!(r.occurrence_share, 0.5);
            assert_eq!(r.reentry_rate, Some(0.0));
        }
    }

    #[test]
    fn single_thread_reentry() {
        let stats = pattern_reentry_stats_from_patterns(&[pat("1,0,1,0,1,1")], 5, false).unwrap();
        let row = stats.row("1,0,1,0,1").unwrap();
        assert_eq!(row.reentry_rate, Some(1.0));
        assert_eq!(row.occurrence_share, 1.0);
    }

    #[test]
    fn prefixes_without_code_one_have_no_rate() {
        let stats = pattern_reentry_stats_from_patterns(&[pat("0,0,0"), pat("1,0,1")], 2, true).unwrap();
        assert_eq!(stats.row("#0:2").unwrap().reentry_rate, None);
        assert_eq!(stats.rows.last().unwrap().key, "#0:2");
        let total: f64 = stats.rows.iter().map(|r| r.occurrence_share).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stats_errors() {
        assert_eq!(
            pattern_reentry_stats_from_patterns(&[pat("0,1")], 1, false),
            Err(PatternError::PrefixTooShort(1))
        );
        assert_eq!(
            pattern_reentry_stats_from_patterns(&[pat("0,1")], 3, false),
            Err(PatternError::NoEligibleThreads(3))
        );
    }

    #[test]
    fn csv_layout() {
        let stats = pattern_reentry_stats_from_patterns(&[pat("1,0,1,0,1,1")], 5, false).unwrap();
        let mut out = Vec::new();
        stats.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "key,reentry_rate,occurrence_share\n\"1,0,1,0,1\",1.000000,1.000000\n"
        );
    }
}
