use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, train_bagged_trees, Dataset, LearnError, Result, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Trees per candidate fit while searching.
    pub inner_trees: usize,
    /// Trees used for the reported AUC of each accepted set.
    pub final_trees: usize,
    /// Minimum AUC improvement needed to accept another feature.
    pub epsilon: f64,
    pub params: TreeParams,
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            inner_trees: 20,
            final_trees: 60,
            epsilon: 1e-4,
            params: TreeParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub feature: String,
    /// Validation AUC of the model on all features selected so far.
    pub auc: f64,
}

fn validation_auc(
    train: &Dataset,
    validation: &Dataset,
    features: &[&str],
    n_trees: usize,
    cfg: &SelectionConfig,
) -> Result<f64> {
    let tr = train.select_features(features)?;
    let va = validation.select_features(features)?;
    let model = train_bagged_trees(&tr, n_trees, cfg.params, cfg.seed)?;
    let scores = model.predict_dataset(&va)?;
    Ok(evaluate(&scores, va.labels(), 0.5)?.auc)
}

/// Greedy forward selection by validation AUC.
///
/// Each step refits on the selected set plus each remaining candidate and
/// keeps the best; equal AUCs go to the alphabetically first name. Stops
/// after `max_steps` or when the best gain is at most `epsilon` over the
/// previous step (0.5 before any feature is chosen).
pub fn stepwise_forward_selection<S: AsRef<str>>(
    train: &Dataset,
    validation: &Dataset,
    candidates: &[S],
    max_steps: usize,
    cfg: &SelectionConfig,
) -> Result<Vec<SelectionStep>> {
    if candidates.is_empty() {
        return Err(LearnError::InvalidArgument("no candidate features".into()));
    }
    if !validation.has_both_classes() {
        return Err(LearnError::SingleClass);
    }
    let mut remaining: Vec<&str> = candidates.iter().map(AsRef::as_ref).collect();
    remaining.sort_unstable();
    remaining.dedup();
    let mut selected: Vec<&str> = Vec::new();
    let mut steps = Vec::new();
    let mut current = 0.5;
    while steps.len() < max_steps && !remaining.is_empty() {
        let scored = remaining
            .par_iter()
            .map(|&f| {
                let mut set = selected.clone();
                set.push(f);
                validation_auc(train, validation, &set, cfg.inner_trees, cfg).map(|a| (f, a))
            })
            .collect::<Result<Vec<_>>>()?;
        // `remaining` is sorted, so keeping the first maximum breaks ties by name.
        let (best, best_auc) = scored
            .iter()
            .copied()
            .fold(None, |acc: Option<(&str, f64)>, (f, a)| match acc {
                Some((_, b)) if a <= b => acc,
                _ => Some((f, a)),
            })
            .expect("remaining is non-empty");
        if best_auc - current <= cfg.epsilon {
            break;
        }
        current = best_auc;
        selected.push(best);
        remaining.retain(|f| *f != best);
        let auc = if cfg.final_trees == cfg.inner_trees {
            best_auc
        } else {
            validation_auc(train, validation, &selected, cfg.final_trees, cfg)?
        };
        steps.push(SelectionStep {
            feature: best.to_string(),
            auc,
        });
    }
    Ok(steps)
}
