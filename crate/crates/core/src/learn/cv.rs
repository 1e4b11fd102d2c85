use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{evaluate, train_bagged_trees, Dataset, LearnError, MetricsReport, Result, TreeParams, DEFAULT_TREES};
use crate::rng::{substream, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub n_trees: usize,
    pub params: TreeParams,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            n_trees: DEFAULT_TREES,
            params: TreeParams::default(),
            threshold: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub mean: MetricsReport,
    /// Per-fold reports; empty when `pooled` is set.
    pub folds: Vec<MetricsReport>,
    /// Some test fold held a single class, so the out-of-fold scores of all
    /// folds were evaluated together instead of averaged per fold.
    pub pooled: bool,
}

/// K-fold cross-validation with folds formed from whole threads.
///
/// Distinct thread ids are shuffled and dealt round-robin into `n_folds`
/// folds. Fails if a training side holds a single class.
pub fn cross_validate(data: &Dataset, n_folds: usize, cfg: &CvConfig) -> Result<CvReport> {
    if n_folds < 2 {
        return Err(LearnError::InvalidArgument(format!(
            "n_folds must be >= 2, got {n_folds}"
        )));
    }
    let mut threads: Vec<&str> = data.ids().iter().map(|id| id.thread_id.as_str()).collect();
    threads.sort_unstable();
    threads.dedup();
    if threads.len() < n_folds {
        return Err(LearnError::InvalidArgument(format!(
            "{n_folds} folds requested but only {} distinct threads",
            threads.len()
        )));
    }
    threads.shuffle(&mut substream(cfg.seed, Domain::Folds, 0));
    let fold_of: BTreeMap<&str, usize> = threads.iter().enumerate().map(|(i, t)| (*t, i % n_folds)).collect();
    let row_fold: Vec<usize> = data.ids().iter().map(|id| fold_of[id.thread_id.as_str()]).collect();

    let mut oof = vec![0.0; data.len()];
    let mut folds = Vec::with_capacity(n_folds);
    let mut pooled = false;
    for k in 0..n_folds {
        let (test_idx, train_idx): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| row_fold[i] == k);
        let train = data.subset(&train_idx);
        let test = data.subset(&test_idx);
        let fold_seed = substream(cfg.seed, Domain::Folds, k as u64 + 1).next_u64();
        let model = train_bagged_trees(&train, cfg.n_trees, cfg.params, fold_seed)?;
        let scores = model.predict_dataset(&test)?;
        for (&i, s) in test_idx.iter().zip(&scores) {
            oof[i] = *s;
        }
        if test.has_both_classes() {
            folds.push(evaluate(&scores, test.labels(), cfg.threshold)?);
        } else {
            pooled = true;
        }
    }
    if pooled {
        return Ok(CvReport {
            mean: evaluate(&oof, data.labels(), cfg.threshold)?,
            folds: Vec::new(),
            pooled,
        });
    }
    Ok(CvReport {
        mean: MetricsReport::mean(&folds).expect("n_folds >= 2"),
        folds,
        pooled,
    })
}
