//! Elastic-net regression of log thread length on post bag-of-words, used to
//! pick a small set of indicative post terms.
//!
//! Minimizes
//! `(1/2n)|y - Xb|^2 + lambda * (rho |b|_1 + (1 - rho)/2 |b|^2)`
//! over standardized term counts and centred `y = ln(1 + length)` by cyclic
//! coordinate descent.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{tokenize, FeatureError, Result};
use crate::rng::{substream, Domain};

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetConfig {
    /// Maximum number of terms returned.
    pub max_terms: usize,
    /// Weight of the L1 part, in `(0, 1]`.
    pub l1_ratio: f64,
    /// Fixed penalty; `None` picks it by cross-validation.
    pub reg_strength: Option<f64>,
    /// Terms must occur in at least this many posts.
    pub min_doc_freq: usize,
    pub cv_folds: usize,
    pub n_lambdas: usize,
    /// Smallest grid value as a fraction of the all-zero threshold.
    pub lambda_min_ratio: f64,
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ElasticNetConfig {
    fn default() -> Self {
        Self {
            max_terms: 50,
            l1_ratio: 0.5,
            reg_strength: None,
            min_doc_freq: 2,
            cv_folds: 5,
            n_lambdas: 20,
            lambda_min_ratio: 1e-3,
            max_sweeps: 1000,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

/// Selected terms with their (standardized) coefficients, largest magnitude first.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSelection {
    pub terms: Vec<(String, f64)>,
    pub lambda: f64,
}

impl TermSelection {
    pub fn term_names(&self) -> Vec<String> {
        self.terms.iter().map(|(t, _)| t.clone()).collect()
    }
}

/// Result of a single fit, including the per-sweep objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetFit {
    pub selection: TermSelection,
    pub objective_history: Vec<f64>,
    pub lambda_max: f64,
}

/// Sparse column-major design: per term, `(row, count)` pairs.
struct Design {
    terms: Vec<String>,
    columns: Vec<Vec<(usize, f64)>>,
}

fn build_design(docs: &[Vec<String>], min_doc_freq: usize) -> Design {
    let mut counts: BTreeMap<&str, Vec<(usize, f64)>> = BTreeMap::new();
    for (row, doc) in docs.iter().enumerate() {
        let mut per_doc: BTreeMap<&str, f64> = BTreeMap::new();
        for t in doc {
            *per_doc.entry(t.as_str()).or_default() += 1.0;
        }
        for (t, c) in per_doc {
            counts.entry(t).or_default().push((row, c));
        }
    }
    let (terms, columns) = counts
        .into_iter()
        .filter(|(_, col)| col.len() >= min_doc_freq.max(1))
        .map(|(t, col)| (t.to_string(), col))
        .unzip();
    Design { terms, columns }
}

/// Nonzero entries of one column as (local row, raw value), with its mean
/// and standard deviation.
type Column = (Vec<(usize, f64)>, f64, f64);

/// Standardized view of a subset of rows.
struct Problem {
    n: usize,
    cols: Vec<Column>,
    y: Vec<f64>,
}

impl Problem {
    fn new(design: &Design, rows: &[usize], y_all: &[f64]) -> Self {
        let n = rows.len();
        let mut local = vec![usize::MAX; y_all.len()];
        for (i, &r) in rows.iter().enumerate() {
            local[r] = i;
        }
        let cols = design
            .columns
            .iter()
            .map(|col| {
                let entries: Vec<(usize, f64)> = col
                    .iter()
                    .filter(|(r, _)| local[*r] != usize::MAX)
                    .map(|(r, v)| (local[*r], *v))
                    .collect();
                let sum: f64 = entries.iter().map(|(_, v)| v).sum();
                let sq: f64 = entries.iter().map(|(_, v)| v * v).sum();
                let mean = sum / n as f64;
                let var = (sq / n as f64 - mean * mean).max(0.0);
                (entries, mean, var.sqrt())
            })
            .collect();
        let ys: Vec<f64> = rows.iter().map(|&r| y_all[r]).collect();
        let ybar = ys.iter().sum::<f64>() / n as f64;
        Self {
            n,
            cols,
            y: ys.into_iter().map(|v| v - ybar).collect(),
        }
    }

    /// `max_j |x_j . y| / (n * rho)`: the smallest penalty with an all-zero fit.
    fn lambda_max(&self, rho: f64) -> f64 {
        self.cols
            .iter()
            .filter(|(_, _, sd)| *sd > 0.0)
            .map(|(e, _, sd)| (e.iter().map(|(r, v)| v * self.y[*r]).sum::<f64>() / sd).abs())
            .fold(0.0, f64::max)
            / (self.n as f64 * rho)
    }

    fn objective(&self, resid: &[f64], shift: f64, beta: &[f64], lambda: f64, rho: f64) -> f64 {
        let rss: f64 = resid.iter().map(|r| (r + shift).powi(2)).sum();
        let l1: f64 = beta.iter().map(|b| b.abs()).sum();
        let l2: f64 = beta.iter().map(|b| b * b).sum();
        rss / (2.0 * self.n as f64) + lambda * (rho * l1 + 0.5 * (1.0 - rho) * l2)
    }

    /// Coordinate descent from `beta` (warm start). Returns the objective
    /// after every sweep.
    fn fit(&self, lambda: f64, rho: f64, beta: &mut [f64], cfg: &ElasticNetConfig) -> Vec<f64> {
        let n = self.n as f64;
        // Residual r_i = resid[i] + shift, r = y - X~ b with standardized columns.
        let mut resid = self.y.clone();
        let mut shift = 0.0;
        for (j, (entries, mean, sd)) in self.cols.iter().enumerate() {
            if beta[j] != 0.0 {
                for (r, v) in entries {
                    resid[*r] -= beta[j] * v / sd;
                }
                shift += beta[j] * mean / sd;
            }
        }
        // Centred columns leave sum(r) unchanged by every update.
        let sum_r: f64 = resid.iter().sum::<f64>() + shift * n;
        let mut history = Vec::new();
        let mut prev = self.objective(&resid, shift, beta, lambda, rho);
        for _ in 0..cfg.max_sweeps {
            for (j, (entries, mean, sd)) in self.cols.iter().enumerate() {
                if *sd == 0.0 {
                    continue;
                }
                // x~_j . r = (x_j . r - mean * sum(r)) / sd, and x~_j . x~_j = n.
                let xr: f64 = entries.iter().map(|(r, v)| v * (resid[*r] + shift)).sum();
                let z = (xr - mean * sum_r) / sd / n + beta[j];
                let soft = z.signum() * (z.abs() - lambda * rho).max(0.0);
                let new = soft / (1.0 + lambda * (1.0 - rho));
                let delta = new - beta[j];
                if delta != 0.0 {
                    for (r, v) in entries {
                        resid[*r] -= delta * v / sd;
                    }
                    shift += delta * mean / sd;
                    beta[j] = new;
                }
            }
            let obj = self.objective(&resid, shift, beta, lambda, rho);
            history.push(obj);
            let converged = (prev - obj).abs() <= cfg.tolerance * prev.abs().max(f64::MIN_POSITIVE);
            prev = obj;
            if converged {
                break;
            }
        }
        history
    }

    fn predict(&self, beta: &[f64], design_rows: &[Vec<(usize, f64)>]) -> Vec<f64> {
        // design_rows[i]: (column, raw value) for a held-out row.
        design_rows
            .iter()
            .map(|row| {
                let mut p: f64 = self
                    .cols
                    .iter()
                    .zip(beta)
                    .filter(|((_, _, sd), b)| **b != 0.0 && *sd > 0.0)
                    .map(|((_, mean, sd), b)| -b * mean / sd)
                    .sum();
                for (j, v) in row {
                    let (_, _, sd) = &self.cols[*j];
                    if beta[*j] != 0.0 && *sd > 0.0 {
                        p += beta[*j] * v / sd;
                    }
                }
                p
            })
            .collect()
    }
}

fn targets(lengths: &[usize]) -> Vec<f64> {
    lengths.iter().map(|&l| (1.0 + l as f64).ln()).collect()
}

fn selection_from(design: &Design, beta: &[f64], lambda: f64, max_terms: usize) -> TermSelection {
    let mut terms: Vec<(String, f64)> = design
        .terms
        .iter()
        .zip(beta)
        .filter(|(_, b)| **b != 0.0)
        .map(|(t, b)| (t.clone(), *b))
        .collect();
    terms.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
    terms.truncate(max_terms);
    TermSelection { terms, lambda }
}

fn check_inputs<S: AsRef<str>>(posts: &[S], lengths: &[usize], cfg: &ElasticNetConfig) -> Result<()> {
    if posts.len() != lengths.len() {
        return Err(FeatureError::InvalidArgument(format!(
            "{} posts but {} lengths",
            posts.len(),
            lengths.len()
        )));
    }
    if posts.is_empty() {
        return Err(FeatureError::EmptyInput("no posts".into()));
    }
    if lengths.iter().all(|l| *l == lengths[0]) {
        return Err(FeatureError::DegenerateTargets("all lengths are equal".into()));
    }
    if !(cfg.l1_ratio > 0.0 && cfg.l1_ratio <= 1.0) {
        return Err(FeatureError::InvalidArgument(format!(
            "l1_ratio {} outside (0, 1]",
            cfg.l1_ratio
        )));
    }
    Ok(())
}

/// One fit at a fixed penalty, with the objective trace.
pub fn fit_elastic_net<S: AsRef<str>>(
    posts: &[S],
    lengths: &[usize],
    lambda: f64,
    cfg: &ElasticNetConfig,
) -> Result<ElasticNetFit> {
    check_inputs(posts, lengths, cfg)?;
    if lambda.is_nan() || lambda < 0.0 {
        return Err(FeatureError::InvalidArgument(format!(
            "reg_strength {lambda} is negative"
        )));
    }
    let docs: Vec<Vec<String>> = posts.iter().map(|p| tokenize(p.as_ref())).collect();
    let design = build_design(&docs, cfg.min_doc_freq);
    let y = targets(lengths);
    let rows: Vec<usize> = (0..posts.len()).collect();
    let problem = Problem::new(&design, &rows, &y);
    let mut beta = vec![0.0; design.terms.len()];
    let objective_history = if lambda.is_finite() {
        problem.fit(lambda, cfg.l1_ratio, &mut beta, cfg)
    } else {
        Vec::new()
    };
    Ok(ElasticNetFit {
        selection: selection_from(&design, &beta, lambda, cfg.max_terms),
        objective_history,
        lambda_max: problem.lambda_max(cfg.l1_ratio),
    })
}

/// Fits the elastic net and returns up to `cfg.max_terms` terms with nonzero
/// coefficients. With no fixed `reg_strength`, the penalty minimizing
/// cross-validated squared error over a log-spaced grid is used.
pub fn select_terms_elastic_net<S: AsRef<str>>(
    posts: &[S],
    lengths: &[usize],
    cfg: &ElasticNetConfig,
) -> Result<ElasticNetFit> {
    check_inputs(posts, lengths, cfg)?;
    let lambda = match cfg.reg_strength {
        Some(l) => l,
        None => cross_validated_lambda(posts, lengths, cfg)?,
    };
    fit_elastic_net(posts, lengths, lambda, cfg)
}

fn cross_validated_lambda<S: AsRef<str>>(posts: &[S], lengths: &[usize], cfg: &ElasticNetConfig) -> Result<f64> {
    let n = posts.len();
    let folds = cfg.cv_folds.clamp(2, n.max(2));
    if n < folds {
        return Err(FeatureError::InvalidArgument(format!(
            "{n} posts cannot fill {folds} folds"
        )));
    }
    let docs: Vec<Vec<String>> = posts.iter().map(|p| tokenize(p.as_ref())).collect();
    let design = build_design(&docs, cfg.min_doc_freq);
    let y = targets(lengths);
    let all: Vec<usize> = (0..n).collect();
    let lambda_max = Problem::new(&design, &all, &y).lambda_max(cfg.l1_ratio);
    if lambda_max == 0.0 {
        return Ok(0.0);
    }
    let steps = cfg.n_lambdas.max(2);
    let grid: Vec<f64> = (0..steps)
        .map(|i| lambda_max * cfg.lambda_min_ratio.powf(i as f64 / (steps - 1) as f64))
        .collect();

    // Row-major copy for held-out prediction.
    let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (j, col) in design.columns.iter().enumerate() {
        for (r, v) in col {
            by_row[*r].push((j, *v));
        }
    }
    let mut order = all.clone();
    order.shuffle(&mut substream(cfg.seed, Domain::Folds, 0));
    let mut errors = vec![0.0; grid.len()];
    for f in 0..folds {
        let test: Vec<usize> = order.iter().copied().skip(f).step_by(folds).collect();
        let mut in_test = vec![false; n];
        test.iter().for_each(|&r| in_test[r] = true);
        let train: Vec<usize> = (0..n).filter(|r| !in_test[*r]).collect();
        let problem = Problem::new(&design, &train, &y);
        let ybar = train.iter().map(|&r| y[r]).sum::<f64>() / train.len() as f64;
        let test_rows: Vec<Vec<(usize, f64)>> = test.iter().map(|&r| by_row[r].clone()).collect();
        let mut beta = vec![0.0; design.terms.len()];
        for (g, &lambda) in grid.iter().enumerate() {
            problem.fit(lambda, cfg.l1_ratio, &mut beta, cfg);
            let pred = problem.predict(&beta, &test_rows);
            errors[g] += test
                .iter()
                .zip(pred)
                .map(|(&r, p)| (y[r] - ybar - p).powi(2))
                .sum::<f64>();
        }
    }
    let best = errors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(grid[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Posts of random filler words with a planted signal term.
    fn planted(n: usize, seed: u64) -> (Vec<String>, Vec<usize>) {
        let mut rng = substream(seed, Domain::Background, 0);
        let mut posts = Vec::new();
        let mut lengths = Vec::new();
        for _ in 0..n {
            let magic = rng.random_range(0..3usize);
            let mut words: Vec<String> = (0..8).map(|_| format!("w{}", rng.random_range(0..30))).collect();
            words.extend(std::iter::repeat_n("magic".to_string(), magic));
            let noise = rng.random_range(0..2usize);
            posts.push(words.join(" "));
            lengths.push(5 + 3 * magic + noise);
        }
        (posts, lengths)
    }

    #[test]
    fn huge_penalty_selects_nothing() {
        let (posts, lengths) = planted(200, 1);
        let cfg = ElasticNetConfig {
            reg_strength: Some(1e9),
            ..Default::default()
        };
        assert!(select_terms_elastic_net(&posts, &lengths, &cfg)
            .unwrap()
            .selection
            .terms
            .is_empty());
        let inf = ElasticNetConfig {
            reg_strength: Some(f64::INFINITY),
            ..Default::default()
        };
        assert!(select_terms_elastic_net(&posts, &lengths, &inf)
            .unwrap()
            .selection
            .terms
            .is_empty());
    }

    #[test]
    fn planted_term_is_selected_positive() {
        let (posts, lengths) = planted(400, 2);
        let fit = select_terms_elastic_net(&posts, &lengths, &ElasticNetConfig::default()).unwrap();
        let (term, coef) = &fit.selection.terms[0];
        assert_eq!(term, "magic");
        assert!(*coef > 0.0);
    }

    #[test]
    fn lasso_isolates_the_predictive_term() {
        let (posts, lengths) = planted(400, 3);
        let cfg = ElasticNetConfig {
            l1_ratio: 1.0,
            ..Default::default()
        };
        let lambda_max = fit_elastic_net(&posts, &lengths, 0.0, &cfg).unwrap().lambda_max;
        let fit = fit_elastic_net(&posts, &lengths, 0.5 * lambda_max, &cfg).unwrap();
        assert_eq!(fit.selection.term_names(), vec!["magic".to_string()]);
    }

    #[test]
    fn objective_never_increases() {
        let (posts, lengths) = planted(300, 4);
        let fit = fit_elastic_net(&posts, &lengths, 0.01, &ElasticNetConfig::default()).unwrap();
        assert!(fit.objective_history.len() > 1);
        for w in fit.objective_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn degenerate_targets_rejected() {
        let err = select_terms_elastic_net(&["a b", "b c"], &[3, 3], &ElasticNetConfig::default()).unwrap_err();
        assert!(matches!(err, FeatureError::DegenerateTargets(_)));
    }
}
