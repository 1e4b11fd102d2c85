use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{LearnError, Result, Scorer};

const CLIP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub struct MetricsReport {
    pub acc: f64,
    pub auc: f64,
    pub rmse: f64,
    pub apr: f64,
    /// Cross-entropy in bits.
    pub cxe: f64,
}

impl MetricsReport {
    pub fn mean(reports: &[MetricsReport]) -> Option<MetricsReport> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let avg = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Some(MetricsReport {
            acc: avg(|r| r.acc),
            auc: avg(|r| r.auc),
            rmse: avg(|r| r.rmse),
            apr: avg(|r| r.apr),
            cxe: avg(|r| r.cxe),
        })
    }
}

/// Writes a `method,ACC,AUC,RMSE,APR,CXE` table.
pub fn write_metrics_table<W: Write>(w: W, rows: &[(&str, MetricsReport)]) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["method", "ACC", "AUC", "RMSE", "APR", "CXE"])?;
    for (name, m) in rows {
        let f = |x: f64| format!("{x:.3}");
        csv.write_record([name.to_string(), f(m.acc), f(m.auc), f(m.rmse), f(m.apr), f(m.cxe)])?;
    }
    csv.flush()
}

/// Area under the ROC curve by the rank statistic; tied scores get half credit.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check(scores, labels)?;
    let pos = labels.iter().filter(|l| **l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(LearnError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of mid-ranks (1-based) of the positives.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let p = pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Average precision: precision at each positive's rank, ranked by score
/// descending with ties kept in input order.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check(scores, labels)?;
    let pos = labels.iter().filter(|l| **l).count();
    if pos == 0 || pos == labels.len() {
        return Err(LearnError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &k) in order.iter().enumerate() {
        if labels[k] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / pos as f64)
}

fn check(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    if scores.len() != labels.len() {
        return Err(LearnError::InvalidArgument(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(LearnError::InvalidArgument(format!("score {s} outside [0, 1]")));
    }
    Ok(())
}

/// All five metrics. ACC predicts positive when `score >= threshold`.
pub fn evaluate(scores: &[f64], labels: &[bool], threshold: f64) -> Result<MetricsReport> {
    check(scores, labels)?;
    let n = scores.len() as f64;
    let y = |l: bool| f64::from(u8::from(l));
    let acc = scores
        .iter()
        .zip(labels)
        .filter(|(s, l)| (**s >= threshold) == **l)
        .count() as f64
        / n;
    let rmse = (scores.iter().zip(labels).map(|(s, l)| (s - y(*l)).powi(2)).sum::<f64>() / n).sqrt();
    let cxe = -scores
        .iter()
        .zip(labels)
        .map(|(s, l)| {
            let s = s.clamp(CLIP, 1.0 - CLIP);
            if *l {
                s.log2()
            } else {
                (1.0 - s).log2()
            }
        })
        .sum::<f64>()
        / n;
    Ok(MetricsReport {
        acc,
        auc: auc(scores, labels)?,
        rmse,
        apr: average_precision(scores, labels)?,
        cxe,
    })
}

/// Always predicts the positive fraction of the labels it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositiveBiasBaseline {
    pub q: f64,
}

impl Scorer for PositiveBiasBaseline {
    fn score(&self, _row: &[f64]) -> f64 {
        self.q
    }
}

pub fn positive_bias_baseline(labels: &[bool]) -> Result<PositiveBiasBaseline> {
    if labels.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    Ok(PositiveBiasBaseline {
        q: labels.iter().filter(|l| **l).count() as f64 / labels.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels_with(pos: usize, n: usize) -> Vec<bool> {
        (0..n).map(|i| i < pos).collect()
    }

    fn binary_entropy_bits(q: f64) -> f64 {
        -(q * q.log2() + (1.0 - q) * (1.0 - q).log2())
    }

    #[test]
    fn perfect_predictor() {
        let labels = vec![true, false, true, false, false];
        let scores: Vec<f64> = labels.iter().map(|l| f64::from(u8::from(*l))).collect();
        let m = evaluate(&scores, &labels, 0.5).unwrap();
        assert_eq!((m.acc, m.auc, m.rmse, m.apr), (1.0, 1.0, 0.0, 1.0));
        assert!(m.cxe < 1e-5);
    }

    #[test]
    fn constant_baseline_matches_closed_forms() {
        for (pos, n) in [(5525, 10_000), (5455, 10_000)] {
            let labels = labels_with(pos, n);
            let b = positive_bias_baseline(&labels).unwrap();
            let q = b.q;
            let m = evaluate(&vec![q; n], &labels, 0.5).unwrap();
            assert!((m.acc - q).abs() < 1e-12);
            assert_eq!(m.auc, 0.5);
            assert!((m.rmse - (q * (1.0 - q)).sqrt()).abs() < 1e-12);
            assert!((m.cxe - binary_entropy_bits(q)).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_rmse_identity() {
        // RMSE^2 = qbar(1-qbar) + (q - qbar)^2 for a constant score q.
        let labels = labels_with(30, 100);
        let m = evaluate(&[0.8; 100], &labels, 0.5).unwrap();
        assert!((m.rmse.powi(2) - (0.3 * 0.7 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn auc_ties_and_symmetry() {
        let labels = [true, false, true, false];
        assert_eq!(auc(&[0.5, 0.5, 0.9, 0.1], &labels).unwrap(), 0.875);
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let s = [0.2, 0.4, 0.9, 0.1];
        let inv: Vec<f64> = s.iter().map(|x| 1.0 - x).collect();
        assert_eq!(auc(&s, &labels).unwrap(), auc(&inv, &flipped).unwrap());
    }

    #[test]
    fn average_precision_by_hand() {
        // Ranked labels 1,0,1,0: (1/1 + 2/3) / 2.
        let ap = average_precision(&[0.9, 0.8, 0.7, 0.1], &[true, false, true, false]).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        // All tied: input order decides.
        let ap = average_precision(&[0.5; 3], &[false, true, true]).unwrap();
        assert!((ap - (0.5 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(evaluate(&[], &[], 0.5), Err(LearnError::EmptyDataset)));
        assert!(matches!(
            evaluate(&[0.3, 0.4], &[true, true], 0.5),
            Err(LearnError::SingleClass)
        ));
        assert!(evaluate(&[1.3, 0.4], &[true, false], 0.5).is_err());
        assert!(evaluate(&[0.3], &[true, false], 0.5).is_err());
    }

    #[test]
    fn baseline_scorer() {
        assert_eq!(positive_bias_baseline(&[true, false]).unwrap().q, 0.5);
        assert_eq!(positive_bias_baseline(&[true, true]).unwrap().q, 1.0);
        assert!(positive_bias_baseline(&[]).is_err());
    }
}
