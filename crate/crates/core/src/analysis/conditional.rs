//! Macro-averaged means of a thread response within groups of threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::{AnalysisError, Result};
use crate::corpus::{Corpus, Thread};
use crate::features::{first_commenter, post_distinctiveness, tokenize, FirstCommenterIndex, UnigramLM};
use crate::patterns::ArrivalPattern;

/// Which interaction sequence the edge-count grouping looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Comments,
    Likes,
}

/// Half-open buckets `[e_i, e_{i+1})`; the last bucket is unbounded.
/// Values below the first edge fall outside every bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct Buckets {
    edges: Vec<f64>,
}

impl Buckets {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.is_empty() || edges.iter().any(|e| !e.is_finite()) {
            return Err(AnalysisError::InvalidArgument(
                "bucket edges must be finite and non-empty".into(),
            ));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AnalysisError::InvalidArgument("bucket edges must increase".into()));
        }
        Ok(Self { edges })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        if x < self.edges[0] || x.is_nan() {
            return None;
        }
        Some(self.edges.partition_point(|e| *e <= x) - 1)
    }

    pub fn label(&self, i: usize) -> String {
        match self.edges.get(i + 1) {
            Some(hi) => format!("[{},{})", self.edges[i], hi),
            None => format!("[{},inf)", self.edges[i]),
        }
    }
}

/// Up to `n` equal-count bucket edges over `values`, starting at the minimum.
pub fn quantile_edges(values: &[f64], n: usize) -> Result<Buckets> {
    if values.is_empty() || n == 0 {
        return Err(AnalysisError::EmptyInput);
    }
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = (0..n).map(|i| sorted[i * sorted.len() / n]).collect();
    edges.dedup();
    Buckets::new(edges)
}

/// How threads are grouped.
#[derive(Debug, Clone)]
pub enum Grouping<'a> {
    /// Threads whose first `k` commenters (or likers) are distinct from each
    /// other and from the poster, keyed by the number of graph edges among
    /// them.
    EdgesAmongFirst { k: usize, entity: Entity },
    /// Threads of length at least 2, keyed by their length-2 arrival pattern.
    LengthTwoPattern,
    /// Threads with a comment, bucketed by seconds from post to first comment.
    FirstCommentLag { buckets: Buckets },
    /// Threads with at least `min_comments` comments whose post has at least
    /// `min_words` tokens, bucketed by post distinctiveness.
    PostDistinctiveness {
        lm: &'a UnigramLM,
        buckets: Buckets,
        min_words: usize,
        min_comments: usize,
    },
    /// Threads with a first commenter, from posters with at least
    /// `min_posts` such threads, bucketed by how rarely that commenter is
    /// first on the poster's threads.
    FirstCommenterDistinctiveness { buckets: Buckets, min_posts: usize },
}

impl Grouping<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Grouping::EdgesAmongFirst { .. } => "edges-among-first-k",
            Grouping::LengthTwoPattern => "length-two-pattern",
            Grouping::FirstCommentLag { .. } => "first-comment-lag",
            Grouping::PostDistinctiveness { .. } => "post-distinctiveness",
            Grouping::FirstCommenterDistinctiveness { .. } => "first-commenter-distinctiveness",
        }
    }

    /// Prefix after which re-entry is measured.
    fn observed_prefix(&self) -> usize {
        match self {
            Grouping::EdgesAmongFirst { k, .. } => *k,
            Grouping::LengthTwoPattern => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Grouping<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The per-thread quantity being averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Response {
    /// Number of comments (number of likes for [`Entity::Likes`]).
    #[default]
    Length,
    /// 1 if ID code 1 comments again after the grouping's observed prefix.
    /// Threads whose prefix lacks code 1 are skipped.
    FirstCommenterReentry,
}

#[derive(Debug, Clone)]
pub struct ConditionalOptions {
    pub response: Response,
    /// A user's threads count towards a group only if there are at least
    /// this many of them in it.
    pub min_threads_per_user: usize,
    /// Groups holding less than this share of the grouped threads are flagged.
    pub sparse_share: f64,
    pub confidence: f64,
}

impl Default for ConditionalOptions {
    fn default() -> Self {
        Self {
            response: Response::Length,
            min_threads_per_user: 1,
            sparse_share: 0.01,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMeanRow {
    pub group: String,
    pub mean: f64,
    /// Infinite when only one user contributes.
    pub ci_half_width: f64,
    pub n_users: usize,
    pub n_threads: usize,
    pub sparse: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMeanTable {
    pub grouping: String,
    pub rows: Vec<ConditionalMeanRow>,
}

impl ConditionalMeanTable {
    pub fn row(&self, group: &str) -> Option<&ConditionalMeanRow> {
        self.rows.iter().find(|r| r.group == group)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["group", "mean", "ci_half_width", "n_users", "n_threads", "sparse"])?;
        for r in &self.rows {
            csv.write_record([
                r.group.clone(),
                format!("{:.6}", r.mean),
                format!("{:.6}", r.ci_half_width),
                r.n_users.to_string(),
                r.n_threads.to_string(),
                r.sparse.to_string(),
            ])?;
        }
        csv.flush()
    }
}

type GroupKey = (usize, String);

fn edges_among(corpus: &Corpus, people: &[&str]) -> usize {
    corpus.graph().edges_among(people)
}

/// First `k` distinct ids, or `None` when a repeat or the poster occurs first.
fn first_distinct<'t>(poster: &str, ids: impl Iterator<Item = &'t str>, k: usize) -> Option<Vec<&'t str>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(k);
    for id in ids.take(k) {
        if id == poster || !seen.insert(id) {
            return None;
        }
        out.push(id);
    }
    (out.len() == k).then_some(out)
}

/// Macro-averaged mean response per group with confidence intervals over
/// the user-level means.
pub fn conditional_mean_length(
    corpus: &Corpus,
    grouping: &Grouping<'_>,
    options: &ConditionalOptions,
) -> Result<ConditionalMeanTable> {
    if corpus.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    if !(options.confidence > 0.0 && options.confidence < 1.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "confidence {}",
            options.confidence
        )));
    }
    if let (
        Grouping::EdgesAmongFirst {
            entity: Entity::Likes, ..
        },
        Response::FirstCommenterReentry,
    ) = (grouping, options.response)
    {
        return Err(AnalysisError::InvalidArgument(
            "re-entry is not defined for like threads".into(),
        ));
    }
    let first_index = match grouping {
        Grouping::FirstCommenterDistinctiveness { min_posts, .. } => {
            Some(FirstCommenterIndex::build(corpus, *min_posts))
        }
        _ => None,
    };
    let observed = grouping.observed_prefix();

    // group -> user -> responses
    let mut groups: BTreeMap<GroupKey, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    for thread in corpus.threads() {
        let Some(key) = group_key(corpus, grouping, first_index.as_ref(), thread)? else {
            continue;
        };
        let value = match options.response {
            Response::Length => match grouping {
                Grouping::EdgesAmongFirst {
                    entity: Entity::Likes, ..
                } => thread.post_likes.len() as f64,
                _ => thread.len() as f64,
            },
            Response::FirstCommenterReentry => {
                if thread.len() < observed {
                    continue;
                }
                let pattern = ArrivalPattern::encode(thread);
                match pattern.reentry_label(observed, 1) {
                    Ok(label) => f64::from(u8::from(label)),
                    Err(_) => continue,
                }
            }
        };
        groups
            .entry(key)
            .or_default()
            .entry(thread.poster_id.as_str())
            .or_default()
            .push(value);
    }

    let mut rows = Vec::new();
    let mut total_threads = 0usize;
    for ((_, label), users) in groups {
        let user_means: Vec<f64> = users
            .values()
            .filter(|v| v.len() >= options.min_threads_per_user.max(1))
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
            .collect();
        let n_threads: usize = users
            .values()
            .filter(|v| v.len() >= options.min_threads_per_user.max(1))
            .map(Vec::len)
            .sum();
        if user_means.is_empty() {
            continue;
        }
        total_threads += n_threads;
        let (mean, half) = mean_ci(&user_means, options.confidence);
        rows.push(ConditionalMeanRow {
            group: label,
            mean,
            ci_half_width: half,
            n_users: user_means.len(),
            n_threads,
            sparse: false,
        });
    }
    if rows.is_empty() {
        return Err(AnalysisError::NoQualifyingThreads(grouping.name().into()));
    }
    for r in &mut rows {
        r.sparse = (r.n_threads as f64) < options.sparse_share * total_threads as f64;
    }
    Ok(ConditionalMeanTable {
        grouping: grouping.name().into(),
        rows,
    })
}

fn group_key(
    corpus: &Corpus,
    grouping: &Grouping<'_>,
    first_index: Option<&FirstCommenterIndex>,
    thread: &Thread,
) -> Result<Option<GroupKey>> {
    let bucket = |b: &Buckets, x: f64| b.index(x).map(|i| (i, b.label(i)));
    Ok(match grouping {
        Grouping::EdgesAmongFirst { k, entity } => {
            let poster = thread.poster_id.as_str();
            let people = match entity {
                Entity::Comments => first_distinct(poster, thread.comments.iter().map(|c| c.author_id.as_str()), *k),
                Entity::Likes => first_distinct(poster, thread.post_likes.iter().map(|l| l.user_id.as_str()), *k),
            };
            people.map(|p| {
                let e = edges_among(corpus, &p);
                (e, format!("{e} edges"))
            })
        }
        Grouping::LengthTwoPattern => (thread.len() >= 2).then(|| {
            let p = ArrivalPattern::encode(thread).prefix(2).expect("length checked");
            // Order: 0,0 < 0,1 < 1,0 < 1,1 < 1,2
            let order = (p.codes()[0] * 3 + p.codes()[1]) as usize;
            (order, p.to_string())
        }),
        Grouping::FirstCommentLag { buckets } => thread
            .comments
            .first()
            .and_then(|c| bucket(buckets, (c.time - thread.post.time) as f64)),
        Grouping::PostDistinctiveness {
            lm,
            buckets,
            min_words,
            min_comments,
        } => {
            if thread.len() < *min_comments || tokenize(&thread.post.text).len() < *min_words {
                None
            } else {
                match post_distinctiveness(&thread.post.text, lm) {
                    Ok(x) => bucket(buckets, x),
                    Err(_) => None,
                }
            }
        }
        Grouping::FirstCommenterDistinctiveness { buckets, .. } => {
            let index = first_index.expect("index built for this grouping");
            first_commenter(thread)
                .and_then(|v| index.distinctiveness(&thread.poster_id, v).ok())
                .and_then(|x| bucket(buckets, x))
        }
    })
}

/// Mean and CI half-width: Student-t below 30 values, normal otherwise.
fn mean_ci(values: &[f64], confidence: f64) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let tail = 0.5 + confidence / 2.0;
    let z = if n < 30 {
        StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(tail)
    } else {
        Normal::standard().inverse_cdf(tail)
    };
    (mean, z * se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::thread;
    use crate::corpus::{Population, SocialGraph};

    fn corpus_with(threads: Vec<Thread>, edges: &[(&str, &str)]) -> Corpus {
        let mut g = SocialGraph::new();
        for (u, v) in edges {
            g.add_edge(u, v).unwrap();
        }
        Corpus::new(threads, g, Population::Synthetic).unwrap()
    }

    #[test]
    fn identical_lengths_give_zero_width() {
        let threads = (0..6)
            .map(|i| thread(&format!("t{i}"), &format!("u{}", i % 3), &["a", "b", "a"]))
            .collect();
        let c = corpus_with(threads, &[]);
        let t = conditional_mean_length(&c, &Grouping::LengthTwoPattern, &Default::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].group, "1,2");
        assert_eq!(t.rows[0].mean, 3.0);
        assert_eq!(t.rows[0].ci_half_width, 0.0);
        assert_eq!(t.rows[0].n_users, 3);
    }

    #[test]
    fn linked_first_commenters_grouped_by_edges() {
        let threads = vec![
            thread("t1", "p1", &["a", "b", "a", "b", "a"]),
            thread("t2", "p2", &["c", "d"]),
            thread("t3", "p1", &["a", "a"]),
        ];
        let c = corpus_with(threads, &[("a", "b")]);
        let g = Grouping::EdgesAmongFirst {
            k: 2,
            entity: Entity::Comments,
        };
        let t = conditional_mean_length(&c, &g, &Default::default()).unwrap();
        assert_eq!(t.row("1 edges").unwrap().mean, 5.0);
        assert_eq!(t.row("0 edges").unwrap().mean, 2.0);
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn macro_average_weights_users_equally() {
        // p1 has three length-2 threads, p2 one length-6 thread: the user
        // means are 2 and 6 so the group mean is 4, not 3.
        let mut threads: Vec<Thread> = (0..3).map(|i| thread(&format!("a{i}"), "p1", &["x", "y"])).collect();
        threads.push(thread("b", "p2", &["x", "y", "x", "y", "x", "y"]));
        let c = corpus_with(threads, &[]);
        let t = conditional_mean_length(&c, &Grouping::LengthTwoPattern, &Default::default()).unwrap();
        assert_eq!(t.rows[0].mean, 4.0);
        assert_eq!(t.rows[0].n_threads, 4);
    }

    #[test]
    fn reentry_response() {
        let threads = vec![
            thread("t1", "p1", &["a", "b", "a"]),
            thread("t2", "p2", &["a", "b", "c"]),
        ];
        let c = corpus_with(threads, &[]);
        let opts = ConditionalOptions {
            response: Response::FirstCommenterReentry,
            ..Default::default()
        };
        let t = conditional_mean_length(&c, &Grouping::LengthTwoPattern, &opts).unwrap();
        assert_eq!(t.row("1,2").unwrap().mean, 0.5);
    }

    #[test]
    fn buckets() {
        let b = Buckets::new(vec![0.0, 60.0, 600.0]).unwrap();
        assert_eq!(b.index(-1.0), None);
        assert_eq!(b.index(0.0), Some(0));
        assert_eq!(b.index(60.0), Some(1));
        assert_eq!(b.index(1e9), Some(2));
        assert_eq!(b.label(0), "[0,60)");
        assert_eq!(b.label(2), "[600,inf)");
        assert!(Buckets::new(vec![1.0, 1.0]).is_err());
        let q = quantile_edges(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(q.edges(), &[1.0, 3.0]);
    }

    #[test]
    fn errors() {
        let empty = corpus_with(vec![], &[]);
        assert!(matches!(
            conditional_mean_length(&empty, &Grouping::LengthTwoPattern, &Default::default()),
            Err(AnalysisError::EmptyCorpus)
        ));
        let c = corpus_with(vec![thread("t", "p", &["a"])], &[]);
        assert!(conditional_mean_length(&c, &Grouping::LengthTwoPattern, &Default::default()).is_err());
    }

    #[test]
    fn sparse_flag() {
        let mut threads: Vec<Thread> = (0..200).map(|i| thread(&format!("a{i}"), "p", &["x", "y"])).collect();
        threads.push(thread("b", "q", &["x", "x"]));
        let c = corpus_with(threads, &[]);
        let t = conditional_mean_length(&c, &Grouping::LengthTwoPattern, &Default::default()).unwrap();
        assert!(t.row("1,1").unwrap().sparse);
        assert!(!t.row("1,2").unwrap().sparse);
    }
}
