//! The nonlinear urn model of thread arrivals.
//!
//! Every participant `c` already in the thread carries a weight `w(c)` and a
//! new participant has fixed weight `beta`. The next commenter is drawn in
//! proportion to these weights, excluding whoever commented last. A returning
//! participant's weight is multiplied by `alpha`; a newcomer enters with
//! weight 1 and divides every other weight by `alpha`.
//!
//! Weights are kept as natural logs so long threads with large `alpha` do not
//! overflow.

use rand::Rng;

use super::{ModelError, Result};
use crate::patterns::ArrivalPattern;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UrnParams {
    alpha: f64,
    beta: f64,
    k: usize,
}

impl UrnParams {
    /// Requires `alpha >= 1`, `beta > 0`, `k >= 1`.
    pub fn new(alpha: f64, beta: f64, k: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(ModelError::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
        }
        if beta == 0.0 {
            return Err(ModelError::InvalidParameter(
                "beta must be > 0; beta = 0 never admits a second commenter and degenerates to a two-party alternation"
                    .into(),
            ));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(ModelError::InvalidParameter(format!("beta must be > 0, got {beta}")));
        }
        if k == 0 {
            return Err(ModelError::InvalidParameter("thread length k must be >= 1".into()));
        }
        Ok(Self { alpha, beta, k })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Who comments next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UrnChoice {
    Existing(u32),
    New,
}

/// Weights after some step of the process.
#[derive(Debug, Clone, PartialEq)]
pub struct UrnState {
    step: usize,
    /// ln w(c), indexed by ID code.
    log_weights: Vec<f64>,
    current: u32,
}

impl UrnState {
    /// After the first comment: code 1 has commented, `w(0) = w(1) = 1`.
    pub fn initial() -> Self {
        Self {
            step: 1,
            log_weights: vec![0.0, 0.0],
            current: 1,
        }
    }

    /// A state with explicit (positive) weights for codes `0..weights.len()`.
    pub fn from_weights(weights: &[f64], current: u32, step: usize) -> Result<Self> {
        if weights.len() < 2 {
            return Err(ModelError::InvalidState(
                "need weights for the poster and code 1".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(ModelError::InvalidState(format!("weight {w} is not positive")));
        }
        if current as usize >= weights.len() {
            return Err(ModelError::InvalidState(format!(
                "current commenter {current} has no weight"
            )));
        }
        Ok(Self {
            step,
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            current,
        })
    }

    /// Rebuilds the state reached after `pattern` by applying the update rules.
    pub fn replay(pattern: &ArrivalPattern, alpha: f64) -> Result<Self> {
        let codes = pattern.codes();
        if codes.first() != Some(&1) {
            return Err(ModelError::InvalidState("urn patterns start with code 1".into()));
        }
        let mut state = Self::initial();
        for &code in &codes[1..] {
            let choice = if code as usize == state.log_weights.len() {
                UrnChoice::New
            } else if code == state.current {
                return Err(ModelError::InvalidState(format!("code {code} repeats consecutively")));
            } else {
                UrnChoice::Existing(code)
            };
            state.advance(choice, alpha);
        }
        Ok(state)
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn current(&self) -> u32 {
        self.current
    }

    /// Participants so far, poster included.
    pub fn participants(&self) -> usize {
        self.log_weights.len()
    }

    pub fn weight(&self, code: u32) -> Option<f64> {
        self.log_weights.get(code as usize).map(|lw| lw.exp())
    }

    pub fn log_weight(&self, code: u32) -> Option<f64> {
        self.log_weights.get(code as usize).copied()
    }

    /// Applies the weight update for the participant chosen at the next step.
    pub fn advance(&mut self, choice: UrnChoice, alpha: f64) {
        let ln_alpha = alpha.ln();
        match choice {
            UrnChoice::Existing(code) => {
                debug_assert_ne!(code, self.current);
                self.log_weights[code as usize] += ln_alpha;
                self.current = code;
            }
            UrnChoice::New => {
                self.log_weights.iter_mut().for_each(|lw| *lw -= ln_alpha);
                self.log_weights.push(0.0);
                self.current = (self.log_weights.len() - 1) as u32;
            }
        }
        self.step += 1;
    }

    /// Largest log-weight among the candidates (and ln beta), for shifting.
    fn shift(&self, ln_beta: f64) -> f64 {
        self.log_weights
            .iter()
            .enumerate()
            .filter(|(c, _)| *c as u32 != self.current)
            .map(|(_, lw)| *lw)
            .fold(ln_beta, f64::max)
    }

    fn sample_next<R: Rng + ?Sized>(&self, params: &UrnParams, rng: &mut R) -> UrnChoice {
        let ln_beta = params.beta.ln();
        let shift = self.shift(ln_beta);
        let beta_term = (ln_beta - shift).exp();
        let total: f64 = beta_term
            + self
                .log_weights
                .iter()
                .enumerate()
                .filter(|(c, _)| *c as u32 != self.current)
                .map(|(_, lw)| (lw - shift).exp())
                .sum::<f64>();
        let mut u = rng.random::<f64>() * total;
        for (c, lw) in self.log_weights.iter().enumerate() {
            if c as u32 == self.current {
                continue;
            }
            let w = (lw - shift).exp();
            if u < w {
                return UrnChoice::Existing(c as u32);
            }
            u -= w;
        }
        UrnChoice::New
    }
}

/// Distribution of the next commenter.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProbabilities {
    /// `(code, probability)` for every existing participant except the
    /// current commenter, in code order.
    pub existing: Vec<(u32, f64)>,
    pub new_participant: f64,
}

impl StepProbabilities {
    pub fn of(&self, code: u32) -> Option<f64> {
        self.existing.iter().find(|(c, _)| *c == code).map(|(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.new_participant + self.existing.iter().map(|(_, p)| p).sum::<f64>()
    }
}

/// `P(c) = w(c) / (beta + sum_{c' != current} w(c'))` for `c != current`,
/// and `P(new) = beta / (same denominator)`.
pub fn urn_step_probabilities(state: &UrnState, params: &UrnParams) -> StepProbabilities {
    let ln_beta = params.beta.ln();
    let shift = state.shift(ln_beta);
    let mut existing: Vec<(u32, f64)> = state
        .log_weights
        .iter()
        .enumerate()
        .filter(|(c, _)| *c as u32 != state.current)
        .map(|(c, lw)| (c as u32, (lw - shift).exp()))
        .collect();
    let beta_term = (ln_beta - shift).exp();
    let total = beta_term + existing.iter().map(|(_, w)| w).sum::<f64>();
    existing.iter_mut().for_each(|(_, w)| *w /= total);
    StepProbabilities {
        existing,
        new_participant: beta_term / total,
    }
}

/// Draws one length-`k` pattern; it starts with code 1 and never repeats a
/// code twice in a row.
pub fn simulate_urn<R: Rng + ?Sized>(params: &UrnParams, rng: &mut R) -> ArrivalPattern {
    let mut codes = Vec::with_capacity(params.k);
    codes.push(1);
    let mut state = UrnState::initial();
    while codes.len() < params.k {
        let choice = state.sample_next(params, rng);
        state.advance(choice, params.alpha);
        codes.push(state.current);
    }
    ArrivalPattern::from_codes_unchecked(codes)
}
