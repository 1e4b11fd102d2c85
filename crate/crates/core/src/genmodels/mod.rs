//! Generative models of arrival patterns.
//!
//! Two families: [`class_f`](ClassFParams) models, where new participants
//! arrive with fixed per-step probabilities, and the nonlinear urn
//! ([`UrnParams`]), whose reinforcing weights produce either focused or
//! expansionary threads.

mod class_f;
mod ensemble;
mod urn;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisError;
use crate::patterns::ArrivalPattern;

pub use class_f::{exact_distinct_distribution_class_f, simulate_class_f, ClassFParams, SelectionRule};
pub use ensemble::{ensemble_density, ensemble_patterns};
pub use urn::{simulate_urn, urn_step_probabilities, StepProbabilities, UrnChoice, UrnParams, UrnState};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid urn state: {0}")]
    InvalidState(String),
    #[error("model config: {0}")]
    Config(String),
    #[error(transparent)]
    Density(#[from] AnalysisError),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Arrival probabilities `p_1..p_k` for a class-F model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalSchedule {
    /// The same `p` at every step.
    Constant(f64),
    /// `p_j` for step `j`; threads longer than the list reuse the last entry.
    Explicit(Vec<f64>),
}

impl ArrivalSchedule {
    pub fn probabilities(&self, k: usize) -> Vec<f64> {
        match self {
            ArrivalSchedule::Constant(p) => vec![*p; k],
            ArrivalSchedule::Explicit(ps) => (0..k).map(|j| *ps.get(j).or(ps.last()).unwrap_or(&1.0)).collect(),
        }
    }
}

impl fmt::Display for ArrivalSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrivalSchedule::Constant(p) => write!(f, "uniform:{p}"),
            ArrivalSchedule::Explicit(ps) => {
                let parts: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for ArrivalSchedule {
    type Err = ModelError;

    /// `uniform:<p>` or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |v: &str| ModelError::Config(format!("bad probability {v:?} in p={s:?}"));
        if let Some(v) = s.strip_prefix("uniform:") {
            let p: f64 = v.trim().parse().map_err(|_| bad(v))?;
            return Ok(ArrivalSchedule::Constant(p));
        }
        let ps = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad(v)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ArrivalSchedule::Explicit(ps))
    }
}

/// A fully specified model: family, parameters and thread length.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    ClassF(ClassFParams),
    Urn(UrnParams),
}

impl ModelSpec {
    pub fn k(&self) -> usize {
        match self {
            ModelSpec::ClassF(p) => p.k(),
            ModelSpec::Urn(p) => p.k(),
        }
    }

    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> ArrivalPattern {
        match self {
            ModelSpec::ClassF(p) => simulate_class_f(p, rng),
            ModelSpec::Urn(p) => simulate_urn(p, rng),
        }
    }

    /// Builds a spec from `key=value` pairs: `model` (urn | classf), `k`,
    /// `alpha`, `beta` (default 1), `theta` (default uniform), `p`.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| pairs.get(key).map(|v| v.trim());
        let number = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| ModelError::Config(format!("{key}={v:?} is not a number")))
                })
                .transpose()
        };
        let k = get("k")
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| ModelError::Config(format!("k={v:?} is not a non-negative integer")))
            })
            .transpose()?;
        let model = get("model").ok_or_else(|| ModelError::Config("missing model".into()))?;
        match model.to_ascii_lowercase().as_str() {
            "urn" => {
                let alpha = number("alpha")?.ok_or_else(|| ModelError::Config("missing alpha".into()))?;
                let beta = number("beta")?.unwrap_or(1.0);
                let k = k.ok_or_else(|| ModelError::Config("missing k".into()))?;
                Ok(ModelSpec::Urn(UrnParams::new(alpha, beta, k)?))
            }
            "classf" | "class-f" => {
                let rule: SelectionRule = get("theta").unwrap_or("uniform").parse()?;
                let schedule: ArrivalSchedule = get("p")
                    .ok_or_else(|| ModelError::Config("missing p".into()))?
                    .parse()?;
                let k = match (&schedule, k) {
                    (_, Some(k)) => k,
                    (ArrivalSchedule::Explicit(ps), None) => ps.len(),
                    (ArrivalSchedule::Constant(_), None) => {
                        return Err(ModelError::Config("missing k".into()));
                    }
                };
                if let ArrivalSchedule::Explicit(ps) = &schedule {
                    if ps.len() != k {
                        return Err(ModelError::Config(format!(
                            "p lists {} probabilities but k = {k}",
                            ps.len()
                        )));
                    }
                }
                Ok(ModelSpec::ClassF(ClassFParams::new(schedule.probabilities(k), rule)?))
            }
            other => Err(ModelError::Config(format!("unknown model {other:?}"))),
        }
    }
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ModelError::Config(format!("line {}: expected key=value", i + 1)))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

impl FromStr for ModelSpec {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_pairs(&parse_key_values(s)?)
    }
}

/// An arrival-pattern source for threads of varying length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum ArrivalModel {
    Urn {
        alpha: f64,
        beta: f64,
    },
    ClassF {
        rule: SelectionRule,
        schedule: ArrivalSchedule,
    },
    /// Each thread draws its component with probability proportional to weight.
    Mixture {
        components: Vec<(f64, ArrivalModel)>,
    },
}

impl ArrivalModel {
    pub fn urn(alpha: f64, beta: f64) -> Self {
        ArrivalModel::Urn { alpha, beta }
    }

    pub fn class_f(rule: SelectionRule, schedule: ArrivalSchedule) -> Self {
        ArrivalModel::ClassF { rule, schedule }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ArrivalModel::Urn { alpha, beta } => UrnParams::new(*alpha, *beta, 1).map(|_| ()),
            ArrivalModel::ClassF { rule, schedule } => {
                let ps = match schedule {
                    ArrivalSchedule::Constant(p) => vec![*p],
                    ArrivalSchedule::Explicit(ps) if ps.is_empty() => {
                        return Err(ModelError::InvalidParameter("empty probability list".into()));
                    }
                    ArrivalSchedule::Explicit(ps) => ps.clone(),
                };
                ClassFParams::new(ps, *rule).map(|_| ())
            }
            ArrivalModel::Mixture { components } => {
                if components.is_empty() {
                    return Err(ModelError::InvalidParameter("empty mixture".into()));
                }
                if components.iter().any(|(w, _)| !(*w >= 0.0 && w.is_finite())) {
                    return Err(ModelError::InvalidParameter(
                        "mixture weights must be non-negative".into(),
                    ));
                }
                if components.iter().map(|(w, _)| w).sum::<f64>() <= 0.0 {
                    return Err(ModelError::InvalidParameter("mixture weights sum to zero".into()));
                }
                components.iter().try_for_each(|(_, m)| m.validate())
            }
        }
    }

    /// Draws a length-`k` pattern (empty when `k` is zero).
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<ArrivalPattern> {
        if k == 0 {
            return Ok(ArrivalPattern::from_codes_unchecked(Vec::new()));
        }
        match self {
            ArrivalModel::Urn { alpha, beta } => Ok(simulate_urn(&UrnParams::new(*alpha, *beta, k)?, rng)),
            ArrivalModel::ClassF { rule, schedule } => {
                let params = ClassFParams::new(schedule.probabilities(k), *rule)?;
                Ok(simulate_class_f(&params, rng))
            }
            ArrivalModel::Mixture { components } => {
                let total: f64 = components.iter().map(|(w, _)| w).sum();
                let mut u = rng.random::<f64>() * total;
                for (w, model) in components {
                    if u < *w {
                        return model.sample(k, rng);
                    }
                    u -= w;
                }
                let (_, last) = components
                    .last()
                    .ok_or_else(|| ModelError::InvalidParameter("empty mixture".into()))?;
                last.sample(k, rng)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Domain};

    #[test]
    fn parses_urn_spec() {
        let spec: ModelSpec = "model=urn\nalpha=4\n# comment\nk=40\n".parse().unwrap();
        assert_eq!(spec, ModelSpec::Urn(UrnParams::new(4.0, 1.0, 40).unwrap()));
    }

    #[test]
    fn parses_class_f_spec() {
        let spec: ModelSpec = "model=classf\np=uniform:0.5\nk=10\ntheta=recency".parse().unwrap();
        match spec {
            ModelSpec::ClassF(p) => {
                assert_eq!(p.p(), &[0.5; 10]);
                assert_eq!(p.rule(), SelectionRule::Recency { decay: 0.5 });
            }
            other => panic!("{other:?}"),
        }
        let spec: ModelSpec = "model=classf\np=1,0.5,0.25".parse().unwrap();
        assert_eq!(spec.k(), 3);
    }

    #[test]
    fn spec_errors() {
        assert!("model=urn\nalpha=4".parse::<ModelSpec>().is_err());
        assert!("model=urn\nalpha=4\nk=5\nbeta=0".parse::<ModelSpec>().is_err());
        assert!("model=classf\np=0.5,0.5\nk=3".parse::<ModelSpec>().is_err());
        assert!("model=tree\nk=3".parse::<ModelSpec>().is_err());
        assert!("alpha".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn arrival_model_lengths() {
        let mut rng = substream(9, Domain::Thread, 0);
        let mix = ArrivalModel::Mixture {
            components: vec![(1.0, ArrivalModel::urn(1.5, 1.0)), (1.0, ArrivalModel::urn(6.0, 1.0))],
        };
        mix.validate().unwrap();
        for k in 0..12 {
            assert_eq!(mix.sample(k, &mut rng).unwrap().len(), k);
        }
        let forced = ArrivalModel::class_f(SelectionRule::Uniform, ArrivalSchedule::Constant(1.0));
        assert_eq!(forced.sample(4, &mut rng).unwrap().to_string(), "1,2,3,4");
    }

    #[test]
    fn arrival_model_serde_round_trip() {
        let m = ArrivalModel::Mixture {
            components: vec![(0.3, ArrivalModel::urn(4.0, 1.0))],
        };
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<ArrivalModel>(&json).unwrap(), m);
    }
}
