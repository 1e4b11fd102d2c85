use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{LearnError, Result};
use crate::rng::{substream, Domain};

/// Where a row came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstanceId {
    pub thread_id: String,
    /// The ID code whose re-entry is predicted, for re-entry tasks.
    pub target_code: Option<u32>,
}

impl InstanceId {
    pub fn thread(thread_id: impl Into<String>) -> Self {
        Self {
            thread_id: thread_id.into(),
            target_code: None,
        }
    }
}

/// A dense feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
    ids: Vec<InstanceId>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<bool>,
        ids: Vec<InstanceId>,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != ids.len() {
            return Err(LearnError::InvalidArgument(format!(
                "{} rows, {} labels, {} ids",
                rows.len(),
                labels.len(),
                ids.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(LearnError::SchemaMismatch {
                    expected: feature_names.len(),
                    got: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(LearnError::InvalidArgument(format!(
                    "row {i} has a missing or non-finite value for {}",
                    feature_names[j]
                )));
            }
        }
        Ok(Self {
            feature_names,
            rows,
            labels,
            ids,
        })
    }

    /// Rows identified by their index.
    pub fn from_rows(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        let ids = (0..rows.len()).map(|i| InstanceId::thread(i.to_string())).collect();
        Self::new(feature_names, rows, labels, ids)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn ids(&self) -> &[InstanceId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| **l).count()
    }

    pub fn positive_fraction(&self) -> f64 {
        self.positives() as f64 / self.len().max(1) as f64
    }

    pub fn has_both_classes(&self) -> bool {
        let p = self.positives();
        p > 0 && p < self.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// The named columns, in the given order.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let idx = names
            .iter()
            .map(|n| {
                self.feature_index(n.as_ref())
                    .ok_or_else(|| LearnError::UnknownFeature(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            feature_names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
            ids: self.ids.clone(),
        })
    }

    /// The listed rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    /// Labels permuted uniformly at random; features untouched.
    pub fn with_shuffled_labels(&self, seed: u64) -> Dataset {
        let mut labels = self.labels.clone();
        labels.shuffle(&mut substream(seed, Domain::Split, 1));
        Dataset { labels, ..self.clone() }
    }

    /// Header of feature names plus `label`; one row per instance.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("label");
        csv.write_record(&header)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(u8::from(*label).to_string());
            csv.write_record(&rec)?;
        }
        csv.flush()
    }

    /// Reads the [`Dataset::write_csv`] layout; rows are identified by index.
    pub fn read_csv<R: Read>(r: R) -> Result<Dataset> {
        let mut csv = csv::Reader::from_reader(r);
        let header = csv.headers().map_err(|e| LearnError::Parse(e.to_string()))?.clone();
        if header.iter().next_back() != Some("label") {
            return Err(LearnError::Parse("last column must be label".into()));
        }
        let names: Vec<String> = header.iter().take(header.len() - 1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in csv.records().enumerate() {
            let bad = |m: String| LearnError::Parse(format!("row {}: {m}", i + 2));
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let values = rec
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| bad(format!("bad number {v:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let (label, row) = values.split_last().ok_or_else(|| bad("empty row".into()))?;
            labels.push(match *label {
                0.0 => false,
                1.0 => true,
                l => return Err(bad(format!("label {l} is not 0 or 1"))),
            });
            rows.push(row.to_vec());
        }
        Self::from_rows(names, rows, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::from_rows(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.5], vec![0.0, -1.0]],
            vec![true, false, true],
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(Dataset::from_rows(vec!["a".into()], vec![vec![1.0, 2.0]], vec![true]).is_err());
        assert!(Dataset::from_rows(vec!["a".into()], vec![vec![f64::NAN]], vec![true]).is_err());
        assert!(Dataset::from_rows(vec!["a".into()], vec![vec![1.0]], vec![]).is_err());
    }

    #[test]
    fn select_and_subset() {
        let d = tiny();
        let s = d.select_features(&["b"]).unwrap();
        assert_eq!(s.rows()[1], vec![4.5]);
        assert!(d.select_features(&["zzz"]).is_err());
        let sub = d.subset(&[2, 0]);
        assert_eq!(sub.labels(), &[true, true]);
        assert_eq!(sub.row(0), &[0.0, -1.0]);
    }

    #[test]
    fn csv_round_trip() {
        let d = tiny();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"a,b,label\n1,2,1\n"));
        assert_eq!(Dataset::read_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn shuffled_labels_keep_counts() {
        let d = tiny();
        let s = d.with_shuffled_labels(5);
        assert_eq!(s.positives(), d.positives());
        assert_eq!(s.rows(), d.rows());
    }
}
