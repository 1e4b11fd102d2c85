//! Turning a corpus into labelled prefix instances.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{Dataset, InstanceId, LearnError, Result};
use crate::corpus::{Corpus, Thread};
use crate::features::{extract_with_names, FeatureConfig};
use crate::patterns::ArrivalPattern;
use crate::rng::{substream, Domain};

/// Prefix instances shared by both tasks.
fn build(
    corpus: &Corpus,
    prefix_len: usize,
    features: &FeatureConfig,
    instances: Vec<(&Thread, Option<u32>, bool)>,
) -> Result<Dataset> {
    let names = Arc::new(features.feature_names(prefix_len));
    let rows = instances
        .par_iter()
        .map(|(t, _, _)| {
            extract_with_names(t, prefix_len, corpus.graph(), features, names.clone()).map(|f| f.into_values())
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let labels = instances.iter().map(|(_, _, l)| *l).collect();
    let ids = instances
        .iter()
        .map(|(t, code, _)| InstanceId {
            thread_id: t.thread_id.clone(),
            target_code: *code,
        })
        .collect();
    Dataset::new(names.to_vec(), rows, labels, ids)
}

/// Every thread with at least `prefix_len` comments, labelled 1 iff it ends
/// with at least `length_threshold` comments.
pub fn length_dataset(
    corpus: &Corpus,
    prefix_len: usize,
    length_threshold: usize,
    features: &FeatureConfig,
) -> Result<Dataset> {
    let instances: Vec<_> = corpus
        .threads()
        .iter()
        .filter(|t| t.len() >= prefix_len)
        .map(|t| (t, None, t.len() >= length_threshold))
        .collect();
    if instances.is_empty() {
        return Err(LearnError::NoQualifyingThreads(format!(
            "no thread has {prefix_len} comments"
        )));
    }
    build(corpus, prefix_len, features, instances)
}

/// Threads whose first `prefix_len` codes include `target_code`, labelled 1
/// iff that participant comments again later.
pub fn reentry_dataset(
    corpus: &Corpus,
    prefix_len: usize,
    target_code: u32,
    features: &FeatureConfig,
) -> Result<Dataset> {
    let instances: Vec<_> = corpus
        .threads()
        .iter()
        .filter(|t| t.len() >= prefix_len)
        .filter_map(|t| {
            ArrivalPattern::encode(t)
                .reentry_label(prefix_len, target_code)
                .ok()
                .map(|label| (t, Some(target_code), label))
        })
        .collect();
    if instances.is_empty() {
        return Err(LearnError::NoQualifyingThreads(format!(
            "no length-{prefix_len} prefix contains code {target_code}"
        )));
    }
    build(corpus, prefix_len, features, instances)
}

/// Splits by thread: a shuffled `test_fraction` of the distinct threads goes
/// to the test side.
pub fn split_by_thread(data: &Dataset, split_seed: u64, test_fraction: f64) -> Result<(Dataset, Dataset)> {
    if !(0.0..=1.0).contains(&test_fraction) {
        return Err(LearnError::InvalidArgument(format!(
            "test_fraction {test_fraction} outside [0, 1]"
        )));
    }
    let mut threads: Vec<&str> = data.ids().iter().map(|id| id.thread_id.as_str()).collect();
    threads.sort_unstable();
    threads.dedup();
    threads.shuffle(&mut substream(split_seed, Domain::Split, 0));
    let n_test = (test_fraction * threads.len() as f64).round() as usize;
    let test_set: std::collections::BTreeSet<&str> = threads[..n_test].iter().copied().collect();
    let (test, train): (Vec<usize>, Vec<usize>) =
        (0..data.len()).partition(|&i| test_set.contains(data.ids()[i].thread_id.as_str()));
    Ok((data.subset(&train), data.subset(&test)))
}

/// Length prediction: will a thread with `prefix_len` comments reach
/// `length_threshold`? Returns `(train, test)`.
pub fn build_length_task(
    corpus: &Corpus,
    prefix_len: usize,
    length_threshold: usize,
    features: &FeatureConfig,
    split_seed: u64,
    test_fraction: f64,
) -> Result<(Dataset, Dataset)> {
    split_by_thread(
        &length_dataset(corpus, prefix_len, length_threshold, features)?,
        split_seed,
        test_fraction,
    )
}

/// Re-entry prediction for `target_code` after `prefix_len` comments.
pub fn build_reentry_task(
    corpus: &Corpus,
    prefix_len: usize,
    target_code: u32,
    features: &FeatureConfig,
    split_seed: u64,
    test_fraction: f64,
) -> Result<(Dataset, Dataset)> {
    split_by_thread(
        &reentry_dataset(corpus, prefix_len, target_code, features)?,
        split_seed,
        test_fraction,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_support::thread;
    use crate::corpus::{Population, SocialGraph};

    fn corpus(threads: Vec<Thread>) -> Corpus {
        Corpus::new(threads, SocialGraph::new(), Population::Synthetic).unwrap()
    }

    #[test]
    fn all_at_prefix_length_are_negative() {
        let c = corpus(
            (0..6)
                .map(|i| thread(&format!("t{i}"), "p", &["a", "b", "c", "d", "e"]))
                .collect(),
        );
        let d = length_dataset(&c, 5, 8, &FeatureConfig::default()).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(d.positives(), 0);
    }

    #[test]
    fn reentry_labels() {
        let c = corpus(vec![
            thread("focused", "p", &["p", "a", "b", "a", "b", "a"]),
            thread("guestbook", "p", &["a", "b", "c", "d", "e"]),
            thread("no_code_one", "p", &["p", "p", "p", "p", "p", "a"]),
        ]);
        let d = reentry_dataset(&c, 5, 1, &FeatureConfig::default()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.labels(), &[true, false]);
        assert_eq!(d.ids()[0].target_code, Some(1));
    }

    #[test]
    fn no_qualifying_threads() {
        let c = corpus(vec![thread("t", "p", &["a"])]);
        assert!(matches!(
            length_dataset(&c, 5, 8, &FeatureConfig::default()),
            Err(LearnError::NoQualifyingThreads(_))
        ));
    }

    #[test]
    fn split_is_disjoint_and_deterministic() {
        let c = corpus((0..20).map(|i| thread(&format!("t{i}"), "p", &["a", "b"])).collect());
        let (train, test) = build_length_task(&c, 2, 3, &FeatureConfig::default(), 4, 0.5).unwrap();
        assert_eq!(train.len(), 10);
        assert_eq!(test.len(), 10);
        for id in test.ids() {
            assert!(!train.ids().contains(id));
        }
        let (train2, _) = build_length_task(&c, 2, 3, &FeatureConfig::default(), 4, 0.5).unwrap();
        assert_eq!(train, train2);
    }
}
