//! Thread data model, corpus files, and synthetic corpus generation.
//!
//! A [`Thread`] is a post followed by an ordered list of comments. Its
//! length (volume) is the number of comments; the post itself is not
//! counted. A [`Corpus`] bundles threads with the [`SocialGraph`] used by the
//! link features.

mod graph;
mod io;
mod synth;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{GraphError, SocialGraph};
pub use io::{
    load_corpus, load_corpus_with, read_edges, read_threads, save_corpus, write_edges, write_threads, LoadOptions,
};
pub use synth::{
    corpus_from_patterns, generate_synthetic_corpus, generate_synthetic_corpus_with_patterns, LengthDistribution,
    SynthConfig,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: duplicate thread_id {thread_id:?}")]
    DuplicateThreadId { line: usize, thread_id: String },

    #[error("line {line}: self-loop edge on {vertex:?}")]
    SelfLoop { line: usize, vertex: String },

    #[error("line {line}: thread {thread_id:?} is invalid: {}", violations.join("; "))]
    InvalidThread {
        line: usize,
        thread_id: String,
        violations: Vec<String>,
    },

    #[error("invalid synthetic corpus configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] crate::genmodels::ModelError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// The initiating item of a thread.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub text: String,
    /// Seconds since the corpus epoch.
    pub time: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub author_id: String,
    pub text: String,
    pub time: u64,
    /// Likes this comment had received.
    pub likes: u32,
}

/// A one-click endorsement of the post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Like {
    pub user_id: String,
    pub time: u64,
}

/// A post together with its comment thread.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    pub thread_id: String,
    pub poster_id: String,
    pub post: Post,
    pub comments: Vec<Comment>,
    #[serde(default)]
    pub post_likes: Vec<Like>,
}

impl Thread {
    /// Number of comments.
    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }

    pub fn post_time(&self) -> u64 {
        self.post.time
    }

    /// Poster, commenters, and likers, each once.
    pub fn participants(&self) -> BTreeSet<&str> {
        let mut ids = BTreeSet::new();
        ids.insert(self.poster_id.as_str());
        ids.extend(self.comments.iter().map(|c| c.author_id.as_str()));
        ids.extend(self.post_likes.iter().map(|l| l.user_id.as_str()));
        ids
    }
}

/// Checks the thread invariants, returning one message per violation.
///
/// Comments are numbered from 1 in the messages.
pub fn validate_thread(thread: &Thread) -> Vec<String> {
    let mut violations = Vec::new();
    if thread.thread_id.is_empty() {
        violations.push("empty thread_id".to_string());
    }
    if thread.poster_id.is_empty() {
        violations.push("empty poster_id".to_string());
    }
    let mut previous: Option<u64> = None;
    for (i, comment) in thread.comments.iter().enumerate() {
        let n = i + 1;
        if comment.author_id.is_empty() {
            violations.push(format!("comment {n} has empty author_id"));
        }
        if comment.time < thread.post.time {
            violations.push(format!("comment {n} time < post time"));
        }
        if let Some(prev) = previous {
            if comment.time < prev {
                violations.push(format!("comment {n} time < comment {} time", n - 1));
            }
        }
        previous = Some(comment.time);
    }
    for (i, like) in thread.post_likes.iter().enumerate() {
        if like.user_id.is_empty() {
            violations.push(format!("post like {} has empty user_id", i + 1));
        }
    }
    violations
}

/// The user population a corpus was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Population {
    Uniform,
    HighActivity,
    WikiStyle,
    #[default]
    Synthetic,
}

impl Population {
    /// Whether the social-network features (links, likes, punctuation) exist
    /// for this population.
    pub fn has_social_features(self) -> bool {
        !matches!(self, Population::WikiStyle)
    }
}

impl std::str::FromStr for Population {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Population::Uniform),
            "high-activity" => Ok(Population::HighActivity),
            "wiki-style" | "wiki" => Ok(Population::WikiStyle),
            "synthetic" => Ok(Population::Synthetic),
            other => Err(format!("unknown population {other:?}")),
        }
    }
}

/// Threads plus the social graph over their participants.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    threads: Vec<Thread>,
    graph: SocialGraph,
    population: Population,
}

impl Corpus {
    /// Validates the threads and registers every participant as a graph
    /// vertex.
    pub fn new(threads: Vec<Thread>, mut graph: SocialGraph, population: Population) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, thread) in threads.iter().enumerate() {
            let violations = validate_thread(thread);
            if !violations.is_empty() {
                return Err(CorpusError::InvalidThread {
                    line: i + 1,
                    thread_id: thread.thread_id.clone(),
                    violations,
                });
            }
            if !seen.insert(thread.thread_id.as_str()) {
                return Err(CorpusError::DuplicateThreadId {
                    line: i + 1,
                    thread_id: thread.thread_id.clone(),
                });
            }
            for id in thread.participants() {
                graph.add_vertex(id);
            }
        }
        Ok(Self {
            threads,
            graph,
            population,
        })
    }

    pub fn empty(population: Population) -> Self {
        Self {
            threads: Vec::new(),
            graph: SocialGraph::default(),
            population,
        }
    }

    pub fn threads(&self) -> &[Thread] {
        &self.threads
    }

    pub fn graph(&self) -> &SocialGraph {
        &self.graph
    }

    pub fn population(&self) -> Population {
        self.population
    }

    pub fn len(&self) -> usize {
        self.threads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threads.is_empty()
    }

    pub fn thread(&self, thread_id: &str) -> Option<&Thread> {
        self.threads.iter().find(|t| t.thread_id == thread_id)
    }

    /// Threads grouped by poster, in poster-id order.
    pub fn threads_by_poster(&self) -> BTreeMap<&str, Vec<&Thread>> {
        let mut map: BTreeMap<&str, Vec<&Thread>> = BTreeMap::new();
        for t in &self.threads {
            map.entry(t.poster_id.as_str()).or_default().push(t);
        }
        map
    }

    /// A corpus restricted to the threads satisfying `keep`. The graph is
    /// shared unchanged.
    pub fn filtered(&self, mut keep: impl FnMut(&Thread) -> bool) -> Corpus {
        Corpus {
            threads: self.threads.iter().filter(|t| keep(t)).cloned().collect(),
            graph: self.graph.clone(),
            population: self.population,
        }
    }

    pub fn with_population(mut self, population: Population) -> Self {
        self.population = population;
        self
    }

    pub fn into_parts(self) -> (Vec<Thread>, SocialGraph, Population) {
        (self.threads, self.graph, self.population)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// A thread whose comments are authored by `authors`, one minute apart.
    pub fn thread(id: &str, poster: &str, authors: &[&str]) -> Thread {
        Thread {
            thread_id: id.to_string(),
            poster_id: poster.to_string(),
            post: Post {
                text: "hello world".to_string(),
                time: 0,
            },
            comments: authors
                .iter()
                .enumerate()
                .map(|(i, a)| Comment {
                    author_id: a.to_string(),
                    text: format!("comment {}", i + 1),
                    time: 60 * (i as u64 + 1),
                    likes: 0,
                })
                .collect(),
            post_likes: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::thread;
    use super::*;

    #[test]
    fn well_formed_thread_has_no_violations() {
        let t = thread("t1", "mary", &["mary", "don", "pat"]);
        assert!(validate_thread(&t).is_empty());
    }

    #[test]
    fn out_of_order_timestamps_are_reported() {
        let mut t = thread("t1", "mary", &["a", "b", "c"]);
        t.comments[2].time = 30;
        assert_eq!(validate_thread(&t), vec!["comment 3 time < comment 2 time".to_string()]);
    }

    #[test]
    fn empty_author_is_reported_once() {
        let mut t = thread("t1", "mary", &["a", "b"]);
        t.comments[0].author_id.clear();
        let v = validate_thread(&t);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("comment 1"), "{v:?}");
    }

    #[test]
    fn comment_before_post_is_reported() {
        let mut t = thread("t1", "mary", &["a"]);
        t.post.time = 100;
        let v = validate_thread(&t);
        assert_eq!(v, vec!["comment 1 time < post time".to_string()]);
    }

    #[test]
    fn corpus_rejects_duplicate_ids() {
        let err = Corpus::new(
            vec![thread("t1", "a", &[]), thread("t1", "b", &[])],
            SocialGraph::default(),
            Population::Synthetic,
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateThreadId { line: 2, .. }));
    }

    #[test]
    fn corpus_registers_participants_as_vertices() {
        let c = Corpus::new(
            vec![thread("t1", "a", &["b", "c"])],
            SocialGraph::default(),
            Population::Synthetic,
        )
        .unwrap();
        for v in ["a", "b", "c"] {
            assert!(c.graph().contains(v));
        }
        assert_eq!(c.graph().edge_count(), 0);
    }
}
