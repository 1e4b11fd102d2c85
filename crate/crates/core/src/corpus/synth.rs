//! Synthetic corpora: model-drawn arrival patterns decorated with
//! participants, a social graph, timestamps, text, and likes.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal, Zipf};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{Comment, Corpus, CorpusError, Like, Population, Post, Result, SocialGraph, Thread};
use crate::genmodels::ArrivalModel;
use crate::patterns::ArrivalPattern;
use crate::rng::{substream, Domain, Rng};

/// Distribution of final thread lengths, sampled through its quantile
/// function so a latent uniform can drive it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LengthDistribution {
    Fixed {
        length: usize,
    },
    Uniform {
        min: usize,
        max: usize,
    },
    /// `min` plus a geometric number of extra comments with mean
    /// `mean_extra`, truncated at `max`.
    Geometric {
        min: usize,
        mean_extra: f64,
        max: usize,
    },
    /// `(length, weight)` pairs.
    Empirical {
        weights: Vec<(usize, f64)>,
    },
}

impl Default for LengthDistribution {
    fn default() -> Self {
        LengthDistribution::Geometric {
            min: 1,
            mean_extra: 9.0,
            max: 200,
        }
    }
}

impl LengthDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CorpusError::Config(m.to_string()));
        match self {
            LengthDistribution::Fixed { .. } => Ok(()),
            LengthDistribution::Uniform { min, max } if min > max => bad("uniform length with min > max"),
            LengthDistribution::Uniform { .. } => Ok(()),
            LengthDistribution::Geometric { min, mean_extra, max } => {
                if !(mean_extra.is_finite() && *mean_extra >= 0.0) {
                    bad("geometric mean_extra must be finite and non-negative")
                } else if min > max {
                    bad("geometric length with min > max")
                } else {
                    Ok(())
                }
            }
            LengthDistribution::Empirical { weights } => {
                if weights.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
                    bad("empirical length weights must be non-negative")
                } else if weights.iter().map(|(_, w)| w).sum::<f64>() <= 0.0 {
                    bad("length distribution has zero support")
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The length at quantile `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> usize {
        let u = u.clamp(0.0, 1.0 - f64::EPSILON);
        match self {
            LengthDistribution::Fixed { length } => *length,
            LengthDistribution::Uniform { min, max } => min + ((max - min + 1) as f64 * u) as usize,
            LengthDistribution::Geometric { min, mean_extra, max } => {
                if *mean_extra == 0.0 {
                    return *min;
                }
                // Failures before the first success, success probability q.
                let q = 1.0 / (1.0 + mean_extra);
                let extra = ((1.0 - u).ln() / (1.0 - q).ln()).floor();
                (*min as f64 + extra).min(*max as f64) as usize
            }
            LengthDistribution::Empirical { weights } => {
                let total: f64 = weights.iter().map(|(_, w)| w).sum();
                let mut acc = 0.0;
                for (len, w) in weights {
                    acc += w / total;
                    if u < acc && *w > 0.0 {
                        return *len;
                    }
                }
                weights.iter().rev().find(|(_, w)| *w > 0.0).map_or(0, |(l, _)| *l)
            }
        }
    }
}

impl fmt::Display for LengthDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthDistribution::Fixed { length } => write!(f, "fixed:{length}"),
            LengthDistribution::Uniform { min, max } => write!(f, "uniform:{min}:{max}"),
            LengthDistribution::Geometric { min, mean_extra, max } => write!(f, "geometric:{min}:{mean_extra}:{max}"),
            LengthDistribution::Empirical { weights } => {
                let parts: Vec<String> = weights.iter().map(|(l, w)| format!("{l}={w}")).collect();
                write!(f, "empirical:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for LengthDistribution {
    type Err = CorpusError;

    /// `fixed:L`, `uniform:MIN:MAX`, `geometric:MIN:MEAN_EXTRA[:MAX]`, or
    /// `empirical:L=W,L=W,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || CorpusError::Config(format!("bad length distribution {s:?}"));
        let int = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(':').collect();
        let dist = match (kind.trim(), parts.as_slice()) {
            ("fixed", [l]) => LengthDistribution::Fixed { length: int(l)? },
            ("uniform", [a, b]) => LengthDistribution::Uniform {
                min: int(a)?,
                max: int(b)?,
            },
            ("geometric", [a, m, rest @ ..]) if rest.len() <= 1 => LengthDistribution::Geometric {
                min: int(a)?,
                mean_extra: m.trim().parse().map_err(|_| bad())?,
                max: rest.first().map(|x| int(x)).transpose()?.unwrap_or(200),
            },
            ("empirical", [list]) => LengthDistribution::Empirical {
                weights: list
                    .split(',')
                    .map(|pair| {
                        let (l, w) = pair.split_once('=').ok_or_else(bad)?;
                        Ok((int(l)?, w.trim().parse::<f64>().map_err(|_| bad())?))
                    })
                    .collect::<Result<_>>()?,
            },
            _ => return Err(bad()),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Parameters of the synthetic corpus generator.
///
/// Each thread draws a latent activity score `z ~ N(0, 1)`. The length
/// quantile is `Φ(ρz + √(1−ρ²)ε)` with `ρ = length_coupling`, and every
/// inter-comment gap has mean `mean_gap_secs · exp(−time_coupling · z)`, so
/// fast early replies signal long threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub posters: usize,
    pub posts_per_poster: usize,
    pub model: ArrivalModel,
    pub lengths: LengthDistribution,
    pub length_coupling: f64,
    pub time_coupling: f64,
    pub mean_gap_secs: f64,
    pub post_spacing_secs: u64,
    /// Friends-of-poster pool that new commenters are drawn from.
    pub audience_size: usize,
    /// Chance a new commenter comes from the audience rather than being a
    /// one-off stranger.
    pub audience_share: f64,
    pub poster_link_prob: f64,
    /// Edge probability between two audience members.
    pub edge_prob: f64,
    pub vocab_size: usize,
    pub zipf_exponent: f64,
    pub post_words: f64,
    pub comment_words: f64,
    pub question_rate: f64,
    pub exclaim_rate: f64,
    pub post_like_mean: f64,
    pub comment_like_mean: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            posters: 50,
            posts_per_poster: 20,
            model: ArrivalModel::urn(4.0, 1.0),
            lengths: LengthDistribution::default(),
            length_coupling: 0.7,
            time_coupling: 1.0,
            mean_gap_secs: 600.0,
            post_spacing_secs: 3600,
            audience_size: 60,
            audience_share: 0.8,
            poster_link_prob: 0.9,
            edge_prob: 0.1,
            vocab_size: 5000,
            zipf_exponent: 1.1,
            post_words: 12.0,
            comment_words: 8.0,
            question_rate: 0.2,
            exclaim_rate: 0.1,
            post_like_mean: 3.0,
            comment_like_mean: 0.5,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CorpusError::Config(m));
        if self.posters == 0 || self.posts_per_poster == 0 {
            return bad("posters and posts_per_poster must be positive".into());
        }
        if self.vocab_size == 0 {
            return bad("vocab_size must be positive".into());
        }
        for (name, p) in [
            ("audience_share", self.audience_share),
            ("poster_link_prob", self.poster_link_prob),
            ("edge_prob", self.edge_prob),
            ("question_rate", self.question_rate),
            ("exclaim_rate", self.exclaim_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if !(-1.0..=1.0).contains(&self.length_coupling) {
            return bad(format!("length_coupling {} outside [-1, 1]", self.length_coupling));
        }
        for (name, v) in [
            ("time_coupling", self.time_coupling),
            ("mean_gap_secs", self.mean_gap_secs),
            ("zipf_exponent", self.zipf_exponent),
            ("post_words", self.post_words),
            ("comment_words", self.comment_words),
            ("post_like_mean", self.post_like_mean),
            ("comment_like_mean", self.comment_like_mean),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        if self.mean_gap_secs < 1.0 {
            return bad("mean_gap_secs must be at least 1".into());
        }
        self.lengths.validate()?;
        self.model.validate()?;
        Ok(())
    }
}

struct Words {
    zipf: Zipf<f64>,
}

impl Words {
    fn new(cfg: &SynthConfig) -> Result<Self> {
        let zipf = Zipf::new(cfg.vocab_size as f64, cfg.zipf_exponent)
            .map_err(|e| CorpusError::Config(format!("zipf: {e}")))?;
        Ok(Self { zipf })
    }

    fn text(&self, mean_words: f64, question: f64, exclaim: f64, rng: &mut Rng) -> String {
        let n = 1 + poisson((mean_words - 1.0).max(0.0), rng);
        let mut words: Vec<String> = (0..n).map(|_| format!("w{}", self.zipf.sample(rng) as u64)).collect();
        if rng.random_bool(question) {
            words.last_mut().expect("n >= 1").push('?');
        } else if rng.random_bool(exclaim) {
            words.last_mut().expect("n >= 1").push('!');
        }
        words.join(" ")
    }
}

fn poisson(mean: f64, rng: &mut Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map_or(0, |d| d.sample(rng) as u64)
}

fn exp_gap(mean: f64, rng: &mut Rng) -> u64 {
    let x: f64 = Exp1.sample(rng);
    ((x * mean).round() as u64).max(1)
}

fn audience_id(poster: usize, member: usize) -> String {
    format!("u{poster}.{member}")
}

fn build_graph(cfg: &SynthConfig) -> Result<SocialGraph> {
    let per_poster: Vec<Vec<(String, String)>> = (0..cfg.posters)
        .into_par_iter()
        .map(|p| {
            let mut rng = substream(cfg.seed, Domain::Graph, p as u64);
            let poster = format!("u{p}");
            let mut edges = Vec::new();
            for a in 0..cfg.audience_size {
                if rng.random_bool(cfg.poster_link_prob) {
                    edges.push((poster.clone(), audience_id(p, a)));
                }
            }
            for a in 0..cfg.audience_size {
                for b in a + 1..cfg.audience_size {
                    if rng.random_bool(cfg.edge_prob) {
                        edges.push((audience_id(p, a), audience_id(p, b)));
                    }
                }
            }
            edges
        })
        .collect();
    let mut graph = SocialGraph::new();
    for (u, v) in per_poster.into_iter().flatten() {
        graph.add_edge(&u, &v).map_err(|e| CorpusError::Config(e.to_string()))?;
    }
    Ok(graph)
}

fn generate_thread(cfg: &SynthConfig, words: &Words, index: usize) -> Result<(Thread, ArrivalPattern)> {
    let poster = index % cfg.posters;
    let post_no = index / cfg.posters;
    let mut rng = substream(cfg.seed, Domain::Thread, index as u64);
    let normal = Normal::standard();

    let z: f64 = StandardNormal.sample(&mut rng);
    let eps: f64 = StandardNormal.sample(&mut rng);
    let rho = cfg.length_coupling;
    let u = normal.cdf(rho * z + (1.0 - rho * rho).sqrt() * eps);
    let len = cfg.lengths.quantile(u);
    let pattern = cfg.model.sample(len, &mut rng)?;

    let thread_id = format!("t{poster}-{post_no}");
    let poster_id = format!("u{poster}");
    let post_time = index as u64 * cfg.post_spacing_secs;
    let post = Post {
        text: words.text(cfg.post_words, cfg.question_rate, cfg.exclaim_rate, &mut rng),
        time: post_time,
    };

    // Participant for each ID code; code 0 is the poster.
    let mut people = vec![poster_id.clone()];
    let mut unused: Vec<usize> = (0..cfg.audience_size).collect();
    let mean_gap = cfg.mean_gap_secs * (-cfg.time_coupling * z).exp();
    let mut time = post_time;
    let mut comments = Vec::with_capacity(len);
    for &code in pattern.codes() {
        if code as usize == people.len() {
            let id = if !unused.is_empty() && rng.random_bool(cfg.audience_share) {
                let member = unused.swap_remove(rng.random_range(0..unused.len()));
                audience_id(poster, member)
            } else {
                format!("x{index}.{code}")
            };
            people.push(id);
        }
        time += exp_gap(mean_gap, &mut rng);
        comments.push(Comment {
            author_id: people[code as usize].clone(),
            text: words.text(cfg.comment_words, cfg.question_rate, cfg.exclaim_rate, &mut rng),
            time,
            likes: poisson(cfg.comment_like_mean, &mut rng) as u32,
        });
    }

    let n_likes = poisson(cfg.post_like_mean, &mut rng);
    let mut post_likes: Vec<Like> = (0..n_likes)
        .map(|i| {
            let user_id = if cfg.audience_size > 0 {
                audience_id(poster, rng.random_range(0..cfg.audience_size))
            } else {
                format!("x{index}.like{i}")
            };
            Like {
                user_id,
                time: post_time + exp_gap(mean_gap * 2.0, &mut rng),
            }
        })
        .collect();
    post_likes.sort_by(|a, b| a.time.cmp(&b.time).then_with(|| a.user_id.cmp(&b.user_id)));

    Ok((
        Thread {
            thread_id,
            poster_id,
            post,
            comments,
            post_likes,
        },
        pattern,
    ))
}

/// Generates a corpus and the arrival pattern drawn for each thread.
pub fn generate_synthetic_corpus_with_patterns(cfg: &SynthConfig) -> Result<(Corpus, Vec<ArrivalPattern>)> {
    cfg.validate()?;
    let words = Words::new(cfg)?;
    let n = cfg.posters * cfg.posts_per_poster;
    let generated = (0..n)
        .into_par_iter()
        .map(|i| generate_thread(cfg, &words, i))
        .collect::<Result<Vec<_>>>()?;
    let (threads, patterns): (Vec<_>, Vec<_>) = generated.into_iter().unzip();
    let corpus = Corpus::new(threads, build_graph(cfg)?, Population::Synthetic)?;
    Ok((corpus, patterns))
}

/// Bare threads realizing `patterns`: one poster per thread (`p{i}`),
/// commenters `p{i}.{code}`, comments a minute apart, no text, likes, or
/// edges.
pub fn corpus_from_patterns(patterns: &[ArrivalPattern]) -> Corpus {
    let threads = patterns
        .iter()
        .enumerate()
        .map(|(i, p)| Thread {
            thread_id: format!("s{i}"),
            poster_id: format!("p{i}"),
            post: Post {
                text: String::new(),
                time: 0,
            },
            comments: p
                .codes()
                .iter()
                .enumerate()
                .map(|(j, &code)| Comment {
                    author_id: if code == 0 {
                        format!("p{i}")
                    } else {
                        format!("p{i}.{code}")
                    },
                    text: String::new(),
                    time: 60 * (j as u64 + 1),
                    likes: 0,
                })
                .collect(),
            post_likes: Vec::new(),
        })
        .collect();
    Corpus::new(threads, SocialGraph::new(), Population::Synthetic).expect("generated threads are valid")
}

/// Generates a synthetic corpus. Equal configs give equal corpora.
pub fn generate_synthetic_corpus(cfg: &SynthConfig) -> Result<Corpus> {
    generate_synthetic_corpus_with_patterns(cfg).map(|(c, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::validate_thread;
    use crate::genmodels::{ArrivalSchedule, SelectionRule};

    fn small() -> SynthConfig {
        SynthConfig {
            posters: 4,
            posts_per_poster: 10,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_and_valid() {
        let (a, patterns) = generate_synthetic_corpus_with_patterns(&small()).unwrap();
        let b = generate_synthetic_corpus(&small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        for (t, p) in a.threads().iter().zip(&patterns) {
            assert!(validate_thread(t).is_empty());
            assert_eq!(&ArrivalPattern::encode(t), p);
            for w in t.comments.windows(2) {
                assert!(w[1].time > w[0].time);
            }
            assert!(t.comments.first().is_none_or(|c| c.time > t.post.time));
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        assert_eq!(pool.install(|| generate_synthetic_corpus(&small()).unwrap()), a);
    }

    #[test]
    fn all_new_participants() {
        let cfg = SynthConfig {
            model: ArrivalModel::class_f(SelectionRule::Uniform, ArrivalSchedule::Constant(1.0)),
            lengths: LengthDistribution::Fixed { length: 6 },
            ..small()
        };
        for t in generate_synthetic_corpus(&cfg).unwrap().threads() {
            assert_eq!(ArrivalPattern::encode(t).to_string(), "1,2,3,4,5,6");
        }
    }

    #[test]
    fn tiny_beta_alternates() {
        let cfg = SynthConfig {
            model: ArrivalModel::urn(1.0, 1e-6),
            lengths: LengthDistribution::Fixed { length: 5 },
            ..small()
        };
        for t in generate_synthetic_corpus(&cfg).unwrap().threads() {
            assert_eq!(ArrivalPattern::encode(t).to_string(), "1,0,1,0,1");
        }
    }

    #[test]
    fn fast_threads_are_long() {
        let cfg = SynthConfig {
            posters: 20,
            posts_per_poster: 20,
            ..Default::default()
        };
        let c = generate_synthetic_corpus(&cfg).unwrap();
        let (mut fast, mut slow) = (Vec::new(), Vec::new());
        for t in c.threads().iter().filter(|t| t.len() >= 2) {
            let lag = t.comments[1].time - t.post.time;
            if lag < 1200 { &mut fast } else { &mut slow }.push(t.len() as f64);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&fast) > mean(&slow));
    }

    #[test]
    fn bare_corpus_keeps_patterns() {
        let p: ArrivalPattern = "1,0,2,1".parse().unwrap();
        let c = corpus_from_patterns(std::slice::from_ref(&p));
        assert_eq!(ArrivalPattern::encode(&c.threads()[0]), p);
    }

    #[test]
    fn length_distributions() {
        let g: LengthDistribution = "geometric:1:9:50".parse().unwrap();
        assert_eq!(g.quantile(0.0), 1);
        assert_eq!(g.quantile(0.999_999_9), 50);
        assert_eq!("uniform:3:5".parse::<LengthDistribution>().unwrap().quantile(0.99), 5);
        let e: LengthDistribution = "empirical:2=1,7=3".parse().unwrap();
        assert_eq!((e.quantile(0.2), e.quantile(0.3)), (2, 7));
        assert!("empirical:2=0".parse::<LengthDistribution>().is_err());
        assert!("uniform:5:3".parse::<LengthDistribution>().is_err());
        for d in [g, e] {
            assert_eq!(d.to_string().parse::<LengthDistribution>().unwrap(), d);
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate_synthetic_corpus(&SynthConfig {
            edge_prob: 1.5,
            ..small()
        })
        .is_err());
        assert!(generate_synthetic_corpus(&SynthConfig { posters: 0, ..small() }).is_err());
    }
}
