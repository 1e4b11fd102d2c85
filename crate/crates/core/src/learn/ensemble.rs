use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{bootstrap_weights, presort};
use super::{Dataset, DecisionTree, LearnError, Result, TreeParams};
use crate::features::FeatureVector;
use crate::rng::{substream, Domain};

pub const DEFAULT_TREES: usize = 60;

/// Anything that maps a feature row to a positive-class score in `[0, 1]`.
pub trait Scorer {
    fn score(&self, row: &[f64]) -> f64;

    fn score_all(&self, data: &Dataset) -> Vec<f64> {
        data.rows().iter().map(|r| self.score(r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggedTree {
    /// Index of the bootstrap substream this tree was fit on.
    pub bootstrap_index: u64,
    pub tree: DecisionTree,
}

/// Bagged decision trees; the score is the mean leaf positive fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub schema: Vec<String>,
    pub seed: u64,
    pub params: TreeParams,
    pub trees: Vec<BaggedTree>,
}

/// Fits `n_trees` trees, tree `i` on a bootstrap sample drawn from
/// substream `(seed, i)`. Trees are fit in parallel; the result does not
/// depend on scheduling.
pub fn train_bagged_trees(train: &Dataset, n_trees: usize, params: TreeParams, seed: u64) -> Result<TreeEnsemble> {
    if train.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    if !train.has_both_classes() {
        return Err(LearnError::SingleClass);
    }
    if n_trees == 0 {
        return Err(LearnError::InvalidArgument("n_trees must be >= 1".into()));
    }
    let presorted = presort(train);
    let trees = (0..n_trees as u64)
        .into_par_iter()
        .map(|i| {
            let weights = bootstrap_weights(train.len(), &mut substream(seed, Domain::Bootstrap, i));
            BaggedTree {
                bootstrap_index: i,
                tree: DecisionTree::fit_presorted(train, &presorted, &weights, params),
            }
        })
        .collect();
    Ok(TreeEnsemble {
        schema: train.feature_names().to_vec(),
        seed,
        params,
        trees,
    })
}

impl TreeEnsemble {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Mean of the trees' leaf fractions for a row in schema order.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.schema.len() {
            return Err(LearnError::SchemaMismatch {
                expected: self.schema.len(),
                got: row.len(),
            });
        }
        Ok(self.score(row))
    }

    /// Checks feature names as well as count.
    pub fn predict_features(&self, features: &FeatureVector) -> Result<f64> {
        if features.names() != self.schema.as_slice() {
            return Err(LearnError::SchemaMismatch {
                expected: self.schema.len(),
                got: features.len(),
            });
        }
        Ok(self.score(features.values()))
    }

    /// Scores for every row of `data`, whose columns must match the schema.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.feature_names() != self.schema.as_slice() {
            return Err(LearnError::SchemaMismatch {
                expected: self.schema.len(),
                got: data.n_features(),
            });
        }
        Ok(data.rows().par_iter().map(|r| self.score(r)).collect())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(|e| LearnError::Parse(e.to_string()))
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let model: TreeEnsemble = serde_json::from_reader(r).map_err(|e| LearnError::Parse(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        use super::tree::Node;
        fn check(node: &Node, width: usize) -> bool {
            match node {
                Node::Leaf { positive_fraction, .. } => (0.0..=1.0).contains(positive_fraction),
                Node::Split {
                    feature, left, right, ..
                } => *feature < width && check(left, width) && check(right, width),
            }
        }
        if self.trees.is_empty() {
            return Err(LearnError::Parse("model has no trees".into()));
        }
        if self.trees.iter().all(|t| check(t.tree.root(), self.schema.len())) {
            Ok(())
        } else {
            Err(LearnError::Parse("model references features outside its schema".into()))
        }
    }
}

impl Scorer for TreeEnsemble {
    fn score(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.tree.predict(row)).sum::<f64>() / self.trees.len() as f64
    }
}
