//! Models with fixed per-step new-participant probabilities.
//!
//! At step `j` a new participant arrives with probability `p_j`; otherwise a
//! selection rule picks one of the participants seen so far (the poster is
//! always among them). Whatever the rule, the arrival events are independent
//! Bernoulli trials, so the number of distinct participants is one plus a
//! Poisson-binomial variable.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{ModelError, Result};
use crate::analysis::Density;
use crate::patterns::ArrivalPattern;

/// How a returning participant is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionRule {
    /// Every existing participant equally likely.
    Uniform,
    /// Probability proportional to comments so far plus `smoothing`.
    RichGetRicher { smoothing: f64 },
    /// Probability proportional to `decay^(steps since last activity)`.
    Recency { decay: f64 },
}

impl SelectionRule {
    pub const RICH_GET_RICHER_DEFAULT: SelectionRule = SelectionRule::RichGetRicher { smoothing: 1.0 };
    pub const RECENCY_DEFAULT: SelectionRule = SelectionRule::Recency { decay: 0.5 };

    fn validate(&self) -> Result<()> {
        match *self {
            SelectionRule::Uniform => Ok(()),
            SelectionRule::RichGetRicher { smoothing } if smoothing > 0.0 && smoothing.is_finite() => Ok(()),
            SelectionRule::Recency { decay } if decay > 0.0 && decay <= 1.0 => Ok(()),
            other => Err(ModelError::InvalidParameter(format!("bad selection rule {other}"))),
        }
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionRule::Uniform => f.write_str("uniform"),
            SelectionRule::RichGetRicher { smoothing } => write!(f, "rich-get-richer:{smoothing}"),
            SelectionRule::Recency { decay } => write!(f, "recency:{decay}"),
        }
    }
}

impl serde::Serialize for SelectionRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for SelectionRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for SelectionRule {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let number = |a: &str| {
            a.parse::<f64>()
                .map_err(|_| ModelError::InvalidParameter(format!("bad selection rule parameter {a:?}")))
        };
        let rule = match (name.to_ascii_lowercase().as_str(), arg) {
            ("uniform", None) => SelectionRule::Uniform,
            ("rich-get-richer" | "rich", None) => Self::RICH_GET_RICHER_DEFAULT,
            ("rich-get-richer" | "rich", Some(a)) => SelectionRule::RichGetRicher { smoothing: number(a)? },
            ("recency", None) => Self::RECENCY_DEFAULT,
            ("recency", Some(a)) => SelectionRule::Recency { decay: number(a)? },
            _ => return Err(ModelError::InvalidParameter(format!("unknown selection rule {s:?}"))),
        };
        rule.validate()?;
        Ok(rule)
    }
}

/// Thread length, selection rule, and the arrival probabilities `p_1..p_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFParams {
    p: Vec<f64>,
    rule: SelectionRule,
}

impl ClassFParams {
    pub fn new(p: Vec<f64>, rule: SelectionRule) -> Result<Self> {
        if let Some((j, x)) = p.iter().enumerate().find(|(_, x)| !(**x > 0.0 && **x <= 1.0)) {
            return Err(ModelError::InvalidParameter(format!(
                "p_{} = {x} is outside (0, 1]",
                j + 1
            )));
        }
        rule.validate()?;
        Ok(Self { p, rule })
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn rule(&self) -> SelectionRule {
        self.rule
    }
}

/// Draws one length-`k` pattern. Consecutive repeats are allowed.
pub fn simulate_class_f<R: Rng + ?Sized>(params: &ClassFParams, rng: &mut R) -> ArrivalPattern {
    let k = params.k();
    let mut codes = Vec::with_capacity(k);
    // Per participant (index = code): comments so far and last active step.
    let mut comments: Vec<f64> = vec![0.0];
    let mut last_active: Vec<usize> = vec![0];
    let mut weights: Vec<f64> = Vec::new();
    for (step, &p) in (1..=k).zip(&params.p) {
        let code = if rng.random::<f64>() < p {
            comments.push(0.0);
            last_active.push(step);
            comments.len() - 1
        } else {
            match params.rule {
                SelectionRule::Uniform => rng.random_range(0..comments.len()),
                SelectionRule::RichGetRicher { smoothing } => {
                    weights.clear();
                    weights.extend(comments.iter().map(|c| c + smoothing));
                    pick_weighted(&weights, rng)
                }
                SelectionRule::Recency { decay } => {
                    weights.clear();
                    weights.extend(last_active.iter().map(|&t| decay.powi((step - t) as i32)));
                    pick_weighted(&weights, rng)
                }
            }
        };
        comments[code] += 1.0;
        last_active[code] = step;
        codes.push(code as u32);
    }
    ArrivalPattern::from_codes_unchecked(codes)
}

fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Exact distribution of the distinct-participant count (poster included):
/// `1 + sum_j Bernoulli(p_j)`, by the Poisson-binomial recurrence.
pub fn exact_distinct_distribution_class_f(p: &[f64]) -> Result<Density> {
    if let Some(x) = p.iter().find(|x| !(**x > 0.0 && **x <= 1.0)) {
        return Err(ModelError::InvalidParameter(format!(
            "probability {x} is outside (0, 1]"
        )));
    }
    // arrivals[n] = P(n new participants so far)
    let mut arrivals = vec![1.0];
    for &pj in p {
        let mut next = vec![0.0; arrivals.len() + 1];
        for (n, &m) in arrivals.iter().enumerate() {
            next[n] += m * (1.0 - pj);
            next[n + 1] += m * pj;
        }
        arrivals = next;
    }
    let mut mass = Vec::with_capacity(arrivals.len() + 1);
    mass.push(0.0);
    mass.extend(arrivals);
    Ok(Density::new(mass)?)
}
