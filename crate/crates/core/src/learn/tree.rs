//! Axis-aligned CART classification trees with Gini impurity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Minimum (bootstrap-weighted) samples on each side of a split.
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 12,
            min_leaf: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        positive_fraction: f64,
        samples: u64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { positive_fraction, .. } => return *positive_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] <= *threshold { left } else { right },
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn visit_features(&self, out: &mut Vec<usize>) {
        if let Node::Split {
            feature, left, right, ..
        } = self
        {
            out.push(*feature);
            left.visit_features(out);
            right.visit_features(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    root: Node,
}

/// Row indices sorted by each feature's value (ties by row index).
pub(crate) fn presort(data: &Dataset) -> Vec<Vec<u32>> {
    (0..data.n_features())
        .map(|j| {
            let mut idx: Vec<u32> = (0..data.len() as u32).collect();
            idx.sort_by(|&a, &b| {
                data.row(a as usize)[j]
                    .total_cmp(&data.row(b as usize)[j])
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect()
}

/// Multiplicity of each row in a bootstrap sample of size `n`.
pub fn bootstrap_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u32> {
    let mut w = vec![0u32; n];
    for _ in 0..n {
        w[rng.random_range(0..n)] += 1;
    }
    w
}

struct Builder<'a> {
    data: &'a Dataset,
    weights: &'a [u32],
    params: TreeParams,
    /// Scratch side assignment, valid for the rows of the node being split.
    goes_left: std::cell::RefCell<Vec<bool>>,
}

fn gini(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    2.0 * p * (1.0 - p)
}

impl Builder<'_> {
    fn value(&self, row: u32, feature: usize) -> f64 {
        self.data.row(row as usize)[feature]
    }

    fn build(&self, sorted: Vec<Vec<u32>>, depth: usize) -> Node {
        let first = &sorted[0];
        let (mut total, mut pos) = (0u64, 0u64);
        // Every per-feature list holds the same rows; feature 0's suffices.
        for &r in first {
            let w = u64::from(self.weights[r as usize]);
            total += w;
            if self.data.labels()[r as usize] {
                pos += w;
            }
        }
        let leaf = Node::Leaf {
            positive_fraction: if total == 0 { 0.0 } else { pos as f64 / total as f64 },
            samples: total,
        };
        let min_leaf = self.params.min_leaf.max(1) as u64;
        if depth >= self.params.max_depth || pos == 0 || pos == total || total < 2 * min_leaf {
            return leaf;
        }
        let (tot, posf) = (total as f64, pos as f64);
        let parent = gini(posf, tot);
        // (gain, feature, threshold)
        let mut best: Option<(f64, usize, f64)> = None;
        for (j, order) in sorted.iter().enumerate() {
            let (mut lw, mut lp) = (0u64, 0u64);
            for w in order.windows(2) {
                let (a, b) = (w[0], w[1]);
                let weight = u64::from(self.weights[a as usize]);
                lw += weight;
                if self.data.labels()[a as usize] {
                    lp += weight;
                }
                let (va, vb) = (self.value(a, j), self.value(b, j));
                if va == vb || lw < min_leaf || total - lw < min_leaf {
                    continue;
                }
                let (l, r) = (lw as f64, (total - lw) as f64);
                let child = (l * gini(lp as f64, l) + r * gini(posf - lp as f64, r)) / tot;
                let gain = parent - child;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    let mut threshold = va + (vb - va) / 2.0;
                    if threshold >= vb {
                        threshold = va;
                    }
                    best = Some((gain, j, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return leaf;
        };
        let (mut left, mut right) = (Vec::with_capacity(sorted.len()), Vec::with_capacity(sorted.len()));
        {
            let mut goes_left = self.goes_left.borrow_mut();
            for &r in first {
                goes_left[r as usize] = self.value(r, feature) <= threshold;
            }
            for order in sorted {
                let (l, r): (Vec<u32>, Vec<u32>) = order.into_iter().partition(|&x| goes_left[x as usize]);
                left.push(l);
                right.push(r);
            }
        }
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.build(left, depth + 1)),
            right: Box::new(self.build(right, depth + 1)),
        }
    }
}

impl DecisionTree {
    /// Fits on rows weighted by `weights` (bootstrap multiplicities); rows
    /// with weight zero are ignored.
    pub fn fit_weighted(data: &Dataset, weights: &[u32], params: TreeParams) -> Self {
        Self::fit_presorted(data, &presort(data), weights, params)
    }

    /// Fits on every row once.
    pub fn fit(data: &Dataset, params: TreeParams) -> Self {
        Self::fit_weighted(data, &vec![1; data.len()], params)
    }

    pub(crate) fn fit_presorted(data: &Dataset, presorted: &[Vec<u32>], weights: &[u32], params: TreeParams) -> Self {
        if data.n_features() == 0 || data.is_empty() {
            let total: u64 = weights.iter().map(|w| u64::from(*w)).sum();
            let pos: u64 = weights
                .iter()
                .zip(data.labels())
                .filter(|(_, l)| **l)
                .map(|(w, _)| u64::from(*w))
                .sum();
            return Self {
                root: Node::Leaf {
                    positive_fraction: if total == 0 { 0.0 } else { pos as f64 / total as f64 },
                    samples: total,
                },
            };
        }
        let sorted = presorted
            .iter()
            .map(|order| order.iter().copied().filter(|&r| weights[r as usize] > 0).collect())
            .collect();
        let builder = Builder {
            data,
            weights,
            params,
            goes_left: std::cell::RefCell::new(vec![false; data.len()]),
        };
        Self {
            root: builder.build(sorted, 0),
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.root.predict(row)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Feature indices used by splits, in pre-order.
    pub fn split_features(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.root.visit_features(&mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let labels = (0..100).map(|i| i >= 37).collect();
        Dataset::from_rows(vec!["x".into()], rows, labels).unwrap()
    }

    #[test]
    fn separable_single_split() {
        let d = separable();
        let t = DecisionTree::fit(&d, TreeParams::default());
        assert_eq!(t.depth(), 1);
        match t.root() {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 36.5),
            other => panic!("{other:?}"),
        }
        for (row, label) in d.rows().iter().zip(d.labels()) {
            assert_eq!(t.predict(row), f64::from(u8::from(*label)));
        }
    }

    #[test]
    fn respects_min_leaf_and_depth() {
        let d = separable();
        let t = DecisionTree::fit(
            &d,
            TreeParams {
                max_depth: 0,
                min_leaf: 1,
            },
        );
        assert_eq!(t.depth(), 0);
        assert!((t.predict(&[0.0]) - 0.63).abs() < 1e-12);
        // No split can leave 60 on both sides of 100 rows.
        let t = DecisionTree::fit(
            &d,
            TreeParams {
                max_depth: 5,
                min_leaf: 60,
            },
        );
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn weights_matter() {
        let d = separable();
        let mut w = vec![1u32; 100];
        w[..37].iter_mut().for_each(|x| *x = 0);
        let t = DecisionTree::fit_weighted(&d, &w, TreeParams::default());
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict(&[0.0]), 1.0);
    }

    #[test]
    fn ties_prefer_lowest_column() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64, i as f64]).collect();
        let labels = (0..60).map(|i| i >= 30).collect();
        let d = Dataset::from_rows(vec!["a".into(), "b".into()], rows, labels).unwrap();
        let t = DecisionTree::fit(&d, TreeParams::default());
        assert_eq!(t.split_features(), vec![0]);
    }

    #[test]
    fn serde_round_trip() {
        let t = DecisionTree::fit(&separable(), TreeParams::default());
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"split\""));
        assert_eq!(serde_json::from_str::<DecisionTree>(&json).unwrap(), t);
    }
}
