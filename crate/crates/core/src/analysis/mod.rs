//! Distinct-participant densities, mode detection and macro-averaged
//! conditional means over a corpus.

mod conditional;
mod density;

use std::io::Write;

use rayon::prelude::*;

use crate::corpus::{Corpus, Thread};
use crate::patterns::ArrivalPattern;

pub use conditional::{
    conditional_mean_length, quantile_edges, Buckets, ConditionalMeanRow, ConditionalMeanTable, ConditionalOptions,
    Entity, Grouping, Response,
};
pub use density::{
    bimodality_gap, default_min_prominence, is_unimodal, modes, modes_default, quantile_mass, Density, Mode,
};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("empty input")]
    EmptyInput,
    #[error("invalid quantile range [{p}, {q}]")]
    InvalidQuantiles { p: f64, q: f64 },
    #[error("no user has a thread of length >= {k}")]
    NoEligibleUsers { k: usize },
    #[error("thread {thread_id} has length {len} < {k}")]
    ThreadTooShort { thread_id: String, len: usize, k: usize },
    #[error("corpus has no threads")]
    EmptyCorpus,
    #[error("no thread qualifies for grouping {0}")]
    NoQualifyingThreads(String),
    #[error("unknown grouping {0:?}")]
    UnknownGrouping(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = AnalysisError> = std::result::Result<T, E>;

/// Distinct participants among the first `k` codes, poster included.
fn prefix_distinct(codes: &[u32], k: usize) -> usize {
    codes[..k].iter().copied().max().unwrap_or(0) as usize + 1
}

/// Mean distinct-participant count over the length-`k` prefixes of one
/// user's threads.
pub fn delta_u(user_threads: &[&Thread], k: usize) -> Result<f64> {
    if user_threads.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    if let Some(t) = user_threads.iter().find(|t| t.len() < k) {
        return Err(AnalysisError::ThreadTooShort {
            thread_id: t.thread_id.clone(),
            len: t.len(),
            k,
        });
    }
    let patterns: Vec<ArrivalPattern> = user_threads.iter().map(|t| ArrivalPattern::encode(t)).collect();
    Ok(delta_sum(&patterns, k) as f64 / patterns.len() as f64)
}

fn delta_sum(patterns: &[ArrivalPattern], k: usize) -> usize {
    patterns.iter().map(|p| prefix_distinct(p.codes(), k)).sum()
}

/// `floor(delta_u(k))` for a user with patterns of any length, or `None`
/// when the user has no pattern of length at least `k`.
fn floored_delta(patterns: &[ArrivalPattern], k: usize) -> Option<usize> {
    let (sum, n) = patterns
        .iter()
        .filter(|p| p.len() >= k)
        .fold((0usize, 0usize), |(s, n), p| (s + prefix_distinct(p.codes(), k), n + 1));
    (n > 0).then(|| sum / n)
}

/// Each user's arrival patterns, users in id order.
fn patterns_by_user(corpus: &Corpus) -> Vec<Vec<ArrivalPattern>> {
    corpus
        .threads_by_poster()
        .into_values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|threads| threads.iter().map(|t| ArrivalPattern::encode(t)).collect())
        .collect()
}

fn density_from_users(users: &[Vec<ArrivalPattern>], k: usize) -> Result<Density> {
    let mut counts = vec![0u64; k + 2];
    let mut any = false;
    for d in users.iter().filter_map(|p| floored_delta(p, k)) {
        counts[d] += 1;
        any = true;
    }
    if !any {
        return Err(AnalysisError::NoEligibleUsers { k });
    }
    Density::from_counts(&counts)
}

/// Fraction of eligible users `u` (those with at least one thread of length
/// `>= k`) whose `floor(delta_u(k))` equals `d`. Every user carries equal
/// weight regardless of how many threads they started.
pub fn density_delta_k(corpus: &Corpus, k: usize) -> Result<Density> {
    density_from_users(&patterns_by_user(corpus), k)
}

/// Same as [`density_delta_k`], from per-user pattern lists.
pub fn density_delta_k_from_patterns(users: &[Vec<ArrivalPattern>], k: usize) -> Result<Density> {
    density_from_users(users, k)
}

/// Columns `k = 1..=k_max` of `Δ*_k`; a column is `None` when no user has a
/// thread that long.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMap {
    columns: Vec<Option<Density>>,
}

impl HeatMap {
    pub fn k_max(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, k: usize) -> Option<&Density> {
        k.checked_sub(1)
            .and_then(|i| self.columns.get(i))
            .and_then(Option::as_ref)
    }

    /// `(k, column)` pairs in increasing `k`.
    pub fn columns(&self) -> impl Iterator<Item = (usize, Option<&Density>)> {
        self.columns.iter().enumerate().map(|(i, c)| (i + 1, c.as_ref()))
    }

    /// One `k,d,mass` row per cell over the full grid `d = 0..=k_max+1`;
    /// missing columns are written as `nan`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,d,mass")?;
        let d_max = self.k_max() + 1;
        for (k, column) in self.columns() {
            for d in 0..=d_max {
                match column {
                    Some(c) => writeln!(w, "{k},{d},{:.9}", c.mass(d))?,
                    None => writeln!(w, "{k},{d},nan")?,
                }
            }
        }
        w.flush()
    }
}

pub fn heatmap(corpus: &Corpus, k_max: usize) -> Result<HeatMap> {
    heatmap_from_patterns(&patterns_by_user(corpus), k_max)
}

pub fn heatmap_from_patterns(users: &[Vec<ArrivalPattern>], k_max: usize) -> Result<HeatMap> {
    if k_max == 0 {
        return Err(AnalysisError::InvalidArgument("k_max must be >= 1".into()));
    }
    let columns = (1..=k_max)
        .into_par_iter()
        .map(|k| density_from_users(users, k).ok())
        .collect();
    Ok(HeatMap { columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::thread;
    use crate::corpus::{Population, SocialGraph};

    fn corpus(threads: Vec<Thread>) -> Corpus {
        Corpus::new(threads, SocialGraph::new(), Population::Synthetic).unwrap()
    }

    #[test]
    fn delta_u_examples() {
        let t = thread("t1", "mary", &["mary", "don", "pat", "don", "pat"]);
        assert_eq!(delta_u(&[&t], 5).unwrap(), 3.0);
        let a = thread("a", "u", &["x", "y", "x", "y", "x"]);
        let b = thread("b", "u", &["x", "y", "z", "x", "y"]);
        assert_eq!(delta_u(&[&a, &b], 5).unwrap(), 3.5);
        let c = thread("c", "u", &["a", "b", "c", "d", "e"]);
        assert_eq!(delta_u(&[&c], 5).unwrap(), 6.0);
    }

    #[test]
    fn delta_u_errors() {
        assert!(matches!(delta_u(&[], 3), Err(AnalysisError::EmptyInput)));
        let t = thread("t", "u", &["a"]);
        assert!(matches!(delta_u(&[&t], 3), Err(AnalysisError::ThreadTooShort { .. })));
    }

    #[test]
    fn two_users_floor_then_count() {
        // u1: one thread with delta 3. u2: deltas 5 and 6, mean 5.5 -> 5.
        let c = corpus(vec![
            thread("a", "u1", &["x", "y", "x", "y", "x"]),
            thread("b", "u2", &["a", "b", "c", "d", "u2"]),
            thread("c", "u2", &["a", "b", "c", "d", "e"]),
        ]);
        let d = density_delta_k(&c, 5).unwrap();
        assert_eq!(d.mass(3), 0.5);
        assert_eq!(d.mass(5), 0.5);
    }

    #[test]
    fn single_user_is_point_mass() {
        let c = corpus(vec![thread("a", "u", &["x", "y"]), thread("b", "u", &["x", "x"])]);
        let d = density_delta_k(&c, 2).unwrap();
        assert_eq!(modes(&d, 0.0).len(), 1);
        assert_eq!(d.masses().iter().filter(|m| **m > 0.0).count(), 1);
    }

    #[test]
    fn no_eligible_users() {
        let c = corpus(vec![thread("a", "u", &["x"])]);
        assert!(matches!(
            density_delta_k(&c, 2),
            Err(AnalysisError::NoEligibleUsers { k: 2 })
        ));
    }

    #[test]
    fn heatmap_columns_match_direct_calls() {
        let c = corpus(vec![
            thread("a", "u1", &["x", "y", "x"]),
            thread("b", "u2", &["a", "b", "c", "d"]),
            thread("c", "u3", &["u3"]),
        ]);
        let h = heatmap(&c, 5).unwrap();
        assert_eq!(h.k_max(), 5);
        for k in 1..=5 {
            assert_eq!(h.column(k).cloned(), density_delta_k(&c, k).ok());
        }
        assert!(h.column(5).is_none());
        let mut out = Vec::new();
        h.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("k,d,mass\n1,0,"));
        assert!(text.contains("5,0,nan"));
        assert_eq!(text.lines().count(), 1 + 5 * 7);
    }

    #[test]
    fn heatmap_rejects_zero_kmax() {
        assert!(heatmap(&corpus(vec![]), 0).is_err());
    }
}
