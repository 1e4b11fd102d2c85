//! Tokenization, the background unigram model and distinctiveness scores.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{FeatureError, Result};
use crate::corpus::{Corpus, Thread};

pub const URL_TOKEN: &str = "<url>";
pub const OOV_TOKEN: &str = "<oov>";

fn is_url(chunk: &str) -> bool {
    let lower = chunk.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Lowercased alphanumeric runs; whitespace-delimited URLs become [`URL_TOKEN`].
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if is_url(chunk) {
            out.push(URL_TOKEN.to_string());
            continue;
        }
        out.extend(
            chunk
                .split(|c: char| !c.is_alphanumeric())
                .filter(|w| !w.is_empty())
                .map(str::to_lowercase),
        );
    }
    out
}

/// Unigram probabilities with a fixed probability for unseen tokens.
///
/// Seen tokens share `1 - oov_floor` in proportion to their counts; the
/// reserved `oov_floor` is the probability of any unseen token.
#[derive(Debug, Clone, PartialEq)]
pub struct UnigramLM {
    probs: BTreeMap<String, f64>,
    oov: f64,
}

impl UnigramLM {
    /// Explicit probabilities; together with `oov` they must sum to 1.
    pub fn from_probabilities(probs: BTreeMap<String, f64>, oov: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&oov) {
            return Err(FeatureError::InvalidArgument(format!("oov mass {oov} outside [0, 1)")));
        }
        if let Some((w, p)) = probs.iter().find(|(_, p)| !(**p > 0.0 && p.is_finite())) {
            return Err(FeatureError::InvalidArgument(format!("p({w}) = {p} is not positive")));
        }
        let total: f64 = probs.values().sum::<f64>() + oov;
        if (total - 1.0).abs() > 1e-9 {
            return Err(FeatureError::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs, oov })
    }

    pub fn prob(&self, token: &str) -> f64 {
        self.probs.get(token).copied().unwrap_or(self.oov)
    }

    pub fn oov_floor(&self) -> f64 {
        self.oov
    }

    pub fn vocabulary_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probabilities(&self) -> &BTreeMap<String, f64> {
        &self.probs
    }

    /// `token,probability` rows with a final `<oov>` row.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["token", "probability"])?;
        for (t, p) in &self.probs {
            csv.write_record([t.as_str(), &format!("{p:e}")])?;
        }
        csv.write_record([OOV_TOKEN, &format!("{:e}", self.oov)])?;
        csv.flush()
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut probs = BTreeMap::new();
        let mut oov = None;
        for (i, rec) in csv::Reader::from_reader(r).records().enumerate() {
            let bad = |m: String| FeatureError::Parse(format!("language model row {}: {m}", i + 2));
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if rec.len() != 2 {
                return Err(bad("expected token,probability".into()));
            }
            let p: f64 = rec[1]
                .parse()
                .map_err(|_| bad(format!("bad probability {:?}", &rec[1])))?;
            if &rec[0] == OOV_TOKEN {
                oov = Some(p);
            } else {
                probs.insert(rec[0].to_string(), p);
            }
        }
        let oov = oov.ok_or_else(|| FeatureError::Parse(format!("language model lacks an {OOV_TOKEN} row")))?;
        Self::from_probabilities(probs, oov)
    }
}

/// Maximum-likelihood unigram model over the tokens of `background`.
pub fn train_unigram_lm<S: AsRef<str>>(background: &[S], oov_floor: f64) -> Result<UnigramLM> {
    if !(0.0..1.0).contains(&oov_floor) {
        return Err(FeatureError::InvalidArgument(format!(
            "oov_floor {oov_floor} outside [0, 1)"
        )));
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for post in background {
        for t in tokenize(post.as_ref()) {
            *counts.entry(t).or_default() += 1;
        }
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(FeatureError::EmptyInput("background corpus has no tokens".into()));
    }
    let scale = (1.0 - oov_floor) / total as f64;
    let probs = counts.into_iter().map(|(t, c)| (t, c as f64 * scale)).collect();
    Ok(UnigramLM { probs, oov: oov_floor })
}

/// Mean of `ln(1/p(w))` over the tokens of `text`.
pub fn post_distinctiveness(text: &str, lm: &UnigramLM) -> Result<f64> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(FeatureError::EmptyInput("text has no tokens".into()));
    }
    let mut sum = 0.0;
    for t in &tokens {
        let p = lm.prob(t);
        if p <= 0.0 {
            return Err(FeatureError::InvalidArgument(format!(
                "token {t:?} has zero probability (oov_floor is 0)"
            )));
        }
        sum += -p.ln();
    }
    Ok(sum / tokens.len() as f64)
}

/// The first comment author other than the poster.
pub fn first_commenter(thread: &Thread) -> Option<&str> {
    thread
        .comments
        .iter()
        .map(|c| c.author_id.as_str())
        .find(|a| *a != thread.poster_id)
}

/// How often each user is the first commenter on each poster's threads.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FirstCommenterIndex {
    min_posts: usize,
    /// poster -> (threads with a first commenter, first-commenter counts)
    posters: BTreeMap<String, (usize, BTreeMap<String, usize>)>,
}

impl FirstCommenterIndex {
    pub fn build(corpus: &Corpus, min_posts: usize) -> Self {
        let mut posters: BTreeMap<String, (usize, BTreeMap<String, usize>)> = BTreeMap::new();
        for t in corpus.threads() {
            if let Some(first) = first_commenter(t) {
                let entry = posters.entry(t.poster_id.clone()).or_default();
                entry.0 += 1;
                *entry.1.entry(first.to_string()).or_default() += 1;
            }
        }
        Self { min_posts, posters }
    }

    pub fn min_posts(&self) -> usize {
        self.min_posts
    }

    /// Fraction of the poster's commented threads whose first commenter is
    /// someone other than `commenter`.
    pub fn distinctiveness(&self, poster: &str, commenter: &str) -> Result<f64> {
        let (n, counts) = self.posters.get(poster).map_or((0, None), |(n, c)| (*n, Some(c)));
        if n < self.min_posts.max(1) {
            return Err(FeatureError::InsufficientPosts {
                poster: poster.to_string(),
                have: n,
                need: self.min_posts.max(1),
            });
        }
        let first = counts.and_then(|c| c.get(commenter)).copied().unwrap_or(0);
        Ok(1.0 - first as f64 / n as f64)
    }
}

pub fn first_commenter_distinctiveness(
    corpus: &Corpus,
    poster: &str,
    commenter: &str,
    min_posts: usize,
) -> Result<f64> {
    let single = corpus.filtered(|t| t.poster_id == poster);
    FirstCommenterIndex::build(&single, min_posts).distinctiveness(poster, commenter)
}
