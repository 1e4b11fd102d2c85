//! Per-prefix thread features, text models and term selection.
//!
//! Indexed features are named `name[i]` where `i` is the 1-based comment
//! index; index 0 denotes the post where the feature is meaningful for it.

mod elastic_net;
mod text;

use std::sync::Arc;

use crate::corpus::{Population, SocialGraph, Thread};
use crate::patterns::ArrivalPattern;

pub use elastic_net::{select_terms_elastic_net, ElasticNetConfig, ElasticNetFit, TermSelection};
pub use text::{
    first_commenter, first_commenter_distinctiveness, post_distinctiveness, tokenize, train_unigram_lm,
    FirstCommenterIndex, UnigramLM, OOV_TOKEN, URL_TOKEN,
};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("prefix length {prefix_len} exceeds thread {thread_id} length {len}")]
    PrefixTooLong {
        thread_id: String,
        prefix_len: usize,
        len: usize,
    },
    #[error("participant {0:?} is not a graph vertex")]
    UnknownParticipant(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("poster {poster} has {have} commented threads, {need} needed")]
    InsufficientPosts { poster: String, have: usize, need: usize },
    #[error("degenerate targets: {0}")]
    DegenerateTargets(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = FeatureError> = std::result::Result<T, E>;

/// Value used when a distinctiveness score is undefined for a thread.
pub const UNDEFINED_SCORE: f64 = -1.0;

/// Named feature values in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    names: Arc<Vec<String>>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which features to compute.
#[derive(Debug, Clone)]
pub struct FeatureConfig {
    /// Link, punctuation and like features (only available for populations
    /// with a social graph).
    pub social: bool,
    /// Post-term indicators.
    pub terms: Vec<String>,
    pub lm: Option<Arc<UnigramLM>>,
    pub first_commenter: Option<Arc<FirstCommenterIndex>>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            social: true,
            terms: Vec::new(),
            lm: None,
            first_commenter: None,
        }
    }
}

impl FeatureConfig {
    pub fn for_population(population: Population) -> Self {
        Self {
            social: population.has_social_features(),
            ..Self::default()
        }
    }

    /// Column names produced for a given prefix length, in output order.
    pub fn feature_names(&self, prefix_len: usize) -> Vec<String> {
        let mut names = Vec::new();
        let mut indexed = |base: &str, from: usize| {
            for i in from..=prefix_len {
                names.push(format!("{base}[{i}]"));
            }
        };
        if self.social {
            indexed("edges_prev", 1);
            indexed("mutual_poster", 1);
        }
        indexed("id_code", 1);
        indexed("uniq_comm", 1);
        indexed("time", 1);
        indexed("num_words", 0);
        indexed("num_chars", 0);
        if self.social {
            indexed("question", 0);
            indexed("exclaim", 0);
            indexed("likes", 1);
            indexed("comment_likes", 1);
        }
        names.extend(self.terms.iter().map(|t| format!("post_term[{t}]")));
        if self.lm.is_some() {
            names.push("post_distinctiveness".into());
        }
        if self.first_commenter.is_some() {
            names.push("first_commenter_distinctiveness".into());
        }
        names
    }
}

fn flag(b: bool) -> f64 {
    f64::from(u8::from(b))
}

/// Features of the first `prefix_len` comments of `thread`. Nothing after
/// comment `prefix_len` is read.
pub fn extract_features(
    thread: &Thread,
    prefix_len: usize,
    graph: &SocialGraph,
    config: &FeatureConfig,
) -> Result<FeatureVector> {
    let names = Arc::new(config.feature_names(prefix_len));
    extract_with_names(thread, prefix_len, graph, config, names)
}

pub(crate) fn extract_with_names(
    thread: &Thread,
    prefix_len: usize,
    graph: &SocialGraph,
    config: &FeatureConfig,
    names: Arc<Vec<String>>,
) -> Result<FeatureVector> {
    if prefix_len > thread.len() {
        return Err(FeatureError::PrefixTooLong {
            thread_id: thread.thread_id.clone(),
            prefix_len,
            len: thread.len(),
        });
    }
    let comments = &thread.comments[..prefix_len];
    let poster = thread.poster_id.as_str();
    if config.social {
        for id in std::iter::once(poster).chain(comments.iter().map(|c| c.author_id.as_str())) {
            if !graph.contains(id) {
                return Err(FeatureError::UnknownParticipant(id.to_string()));
            }
        }
    }
    let prefix = Thread {
        comments: comments.to_vec(),
        ..thread.clone()
    };
    let codes = ArrivalPattern::encode(&prefix).codes().to_vec();
    let mut values = Vec::with_capacity(names.len());

    if config.social {
        // Distinct earlier participants (poster first) per comment.
        let mut earlier: Vec<&str> = vec![poster];
        let mut edges_prev = Vec::with_capacity(prefix_len);
        for c in comments {
            let a = c.author_id.as_str();
            edges_prev.push(earlier.iter().filter(|p| **p != a && graph.linked(a, p)).count() as f64);
            if !earlier.contains(&a) {
                earlier.push(a);
            }
        }
        values.extend(edges_prev);
        values.extend(
            comments
                .iter()
                .map(|c| graph.common_neighbors(&c.author_id, poster) as f64),
        );
    }
    values.extend(codes.iter().map(|&c| f64::from(c)));
    let mut max_code = 0;
    values.extend(codes.iter().map(|&c| {
        max_code = max_code.max(c);
        f64::from(max_code)
    }));
    values.extend(comments.iter().map(|c| (c.time - thread.post.time) as f64));
    let texts: Vec<&str> = std::iter::once(thread.post.text.as_str())
        .chain(comments.iter().map(|c| c.text.as_str()))
        .collect();
    values.extend(texts.iter().map(|t| tokenize(t).len() as f64));
    values.extend(texts.iter().map(|t| t.chars().count() as f64));
    if config.social {
        values.extend(texts.iter().map(|t| flag(t.contains('?'))));
        values.extend(texts.iter().map(|t| flag(t.contains('!'))));
        values.extend(
            comments
                .iter()
                .map(|c| thread.post_likes.iter().filter(|l| l.time < c.time).count() as f64),
        );
        let mut running = 0u64;
        values.extend(comments.iter().map(|c| {
            let before = running as f64;
            running += u64::from(c.likes);
            before
        }));
    }
    if !config.terms.is_empty() {
        let post_tokens = tokenize(&thread.post.text);
        values.extend(config.terms.iter().map(|t| flag(post_tokens.contains(t))));
    }
    if let Some(lm) = &config.lm {
        values.push(post_distinctiveness(&thread.post.text, lm).unwrap_or(UNDEFINED_SCORE));
    }
    if let Some(index) = &config.first_commenter {
        let score = first_commenter(&prefix)
            .and_then(|v| index.distinctiveness(poster, v).ok())
            .unwrap_or(UNDEFINED_SCORE);
        values.push(score);
    }
    debug_assert_eq!(values.len(), names.len());
    Ok(FeatureVector { names, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Comment, Like, Post};

    fn comment(author: &str, text: &str, time: u64, likes: u32) -> Comment {
        Comment {
            author_id: author.into(),
            text: text.into(),
            time,
            likes,
        }
    }

    fn sample() -> (Thread, SocialGraph) {
        let thread = Thread {
            thread_id: "t".into(),
            poster_id: "p".into(),
            post: Post {
                text: "Who is around? Anyone!".into(),
                time: 0,
            },
            comments: vec![
                comment("a", "hi there", 60, 2),
                comment("b", "really?!", 300, 1),
                comment("p", "yes", 400, 0),
            ],
            post_likes: vec![
                Like {
                    user_id: "x".into(),
                    time: 10,
                },
                Like {
                    user_id: "y".into(),
                    time: 350,
                },
            ],
        };
        let mut g = SocialGraph::new();
        g.add_edge("a", "b").unwrap();
        g.add_edge("a", "p").unwrap();
        g.add_edge("b", "c").unwrap();
        g.add_edge("p", "c").unwrap();
        (thread, g)
    }

    #[test]
    fn hand_evaluated_example() {
        let (t, g) = sample();
        let f = extract_features(&t, 2, &g, &FeatureConfig::default()).unwrap();
        assert_eq!(f.get("edges_prev[1]"), Some(1.0));
        assert_eq!(f.get("edges_prev[2]"), Some(1.0));
        assert_eq!(f.get("uniq_comm[2]"), Some(2.0));
        assert_eq!(f.get("id_code[2]"), Some(2.0));
        // b's neighbours {a, c}; p's neighbours {a, c}.
        assert_eq!(f.get("mutual_poster[2]"), Some(2.0));
        assert_eq!(f.get("mutual_poster[1]"), Some(0.0));
        assert_eq!(f.get("time[1]"), Some(60.0));
        assert_eq!(f.get("time[2]"), Some(300.0));
        assert_eq!(f.get("question[2]"), Some(1.0));
        assert_eq!(f.get("exclaim[2]"), Some(1.0));
        assert_eq!(f.get("num_words[2]"), Some(1.0));
        assert_eq!(f.get("num_chars[2]"), Some(8.0));
        assert_eq!(f.get("question[0]"), Some(1.0));
        assert_eq!(f.get("num_words[0]"), Some(4.0));
        assert_eq!(f.get("likes[1]"), Some(1.0));
        assert_eq!(f.get("likes[2]"), Some(1.0));
        assert_eq!(f.get("comment_likes[1]"), Some(0.0));
        assert_eq!(f.get("comment_likes[2]"), Some(2.0));
        assert_eq!(f.get("time[3]"), None);
        assert_eq!(f.names().len(), f.values().len());
    }

    #[test]
    fn social_gating() {
        let (t, _) = sample();
        let cfg = FeatureConfig::for_population(Population::WikiStyle);
        let f = extract_features(&t, 3, &SocialGraph::new(), &cfg).unwrap();
        assert!(f.get("edges_prev[1]").is_none());
        assert!(f.get("likes[1]").is_none());
        assert_eq!(f.get("id_code[3]"), Some(0.0));
        assert_eq!(f.get("uniq_comm[3]"), Some(2.0));
    }

    #[test]
    fn errors() {
        let (t, g) = sample();
        assert!(matches!(
            extract_features(&t, 4, &g, &FeatureConfig::default()),
            Err(FeatureError::PrefixTooLong { .. })
        ));
        assert!(matches!(
            extract_features(&t, 1, &SocialGraph::new(), &FeatureConfig::default()),
            Err(FeatureError::UnknownParticipant(_))
        ));
    }

    #[test]
    fn optional_text_features() {
        let (t, g) = sample();
        let lm = train_unigram_lm(&["who is around anyone"], 0.01).unwrap();
        let cfg = FeatureConfig {
            terms: vec!["anyone".into(), "magic".into()],
            lm: Some(Arc::new(lm)),
            ..Default::default()
        };
        let f = extract_features(&t, 1, &g, &cfg).unwrap();
        assert_eq!(f.get("post_term[anyone]"), Some(1.0));
        assert_eq!(f.get("post_term[magic]"), Some(0.0));
        assert!((f.get("post_distinctiveness").unwrap() - (4.0f64 / 0.99).ln()).abs() < 1e-12);
    }

    #[test]
    fn prefix_zero_has_post_features_only() {
        let (t, g) = sample();
        let f = extract_features(&t, 0, &g, &FeatureConfig::default()).unwrap();
        assert_eq!(f.get("num_words[0]"), Some(4.0));
        assert!(f.get("time[1]").is_none());
    }
}
