use std::collections::BTreeMap;

use proptest::prelude::*;
use threadlab::corpus::{Comment, Post, Thread};
use threadlab::patterns::{encode_arrival_pattern, pattern_reentry_stats_from_patterns, ArrivalPattern};

fn thread(poster: u8, authors: &[u8]) -> Thread {
    Thread {
        thread_id: "t".into(),
        poster_id: format!("u{poster}"),
        post: Post {
            text: String::new(),
            time: 0,
        },
        comments: authors
            .iter()
            .zip(0..)
            .map(|(a, time)| Comment {
                author_id: format!("u{a}"),
                text: String::new(),
                time,
                likes: 0,
            })
            .collect(),
        post_likes: Vec::new(),
    }
}

fn authors() -> impl Strategy<Value = (u8, Vec<u8>)> {
    (0u8..6, proptest::collection::vec(0u8..8, 0..30))
}

proptest! {
    #[test]
    fn renaming_users_keeps_the_pattern((poster, authors) in authors(), shift in 1u8..50) {
        let renamed: Vec<u8> = authors.iter().map(|a| a.wrapping_add(shift)).collect();
        prop_assert_eq!(
            encode_arrival_pattern(&thread(poster, &authors)),
            encode_arrival_pattern(&thread(poster.wrapping_add(shift), &renamed))
        );
    }

    #[test]
    fn prefix_of_encoding_is_encoding_of_prefix((poster, authors) in authors(), cut in 0usize..30) {
        let cut = cut.min(authors.len());
        let whole = encode_arrival_pattern(&thread(poster, &authors));
        prop_assert_eq!(whole.prefix(cut).unwrap(), encode_arrival_pattern(&thread(poster, &authors[..cut])));
    }

    #[test]
    fn text_form_round_trips((poster, authors) in authors()) {
        let p = encode_arrival_pattern(&thread(poster, &authors));
        prop_assert_eq!(p.to_string().parse::<ArrivalPattern>().unwrap(), p);
    }

    #[test]
    fn reentry_matches_author_lookup((poster, authors) in authors(), cut in 1usize..10) {
        prop_assume!(cut <= authors.len());
        let t = thread(poster, &authors);
        let p = encode_arrival_pattern(&t);
        let first = t.comments.iter().map(|c| &c.author_id).find(|a| **a != t.poster_id);
        let in_prefix = first.is_some_and(|f| t.comments[..cut].iter().any(|c| &c.author_id == f));
        match p.reentry_label(cut, 1) {
            Ok(label) => {
                prop_assert!(in_prefix);
                let again = t.comments[cut..].iter().any(|c| Some(&c.author_id) == first);
                prop_assert_eq!(label, again);
            }
            Err(_) => prop_assert!(!in_prefix),
        }
    }

    #[test]
    fn bins_erase_order_only((poster, authors) in authors()) {
        let p = encode_arrival_pattern(&thread(poster, &authors));
        prop_assert_eq!(p.bin().total(), p.len());
        let mut sorted = p.codes().to_vec();
        sorted.sort_unstable();
        let rebuilt: Vec<u32> = p.bin().counts().iter().flat_map(|(c, n)| std::iter::repeat_n(*c, *n)).collect();
        prop_assert_eq!(rebuilt, sorted);
    }
}

#[test]
fn out_of_order_codes_are_rejected() {
    assert!(ArrivalPattern::new(vec![2, 1]).is_err());
    assert!(ArrivalPattern::new(vec![0, 1, 3]).is_err());
    assert!(ArrivalPattern::new(vec![0, 0, 1, 1, 2]).is_ok());
}

#[test]
fn stats_agree_with_direct_count() {
    let patterns: Vec<ArrivalPattern> = [
        "1,0,1,0,1,1",
        "1,0,1,0,1,2",
        "1,0,1,0,1",
        "1,2,3,4,5,1",
        "1,2,3,4,5,6",
        "1,2",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    let stats = pattern_reentry_stats_from_patterns(&patterns, 5, false).unwrap();
    assert_eq!(stats.eligible_threads, 5);

    let mut direct: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for p in patterns.iter().filter(|p| p.len() >= 5) {
        let e = direct.entry(p.prefix(5).unwrap().to_string()).or_default();
        e.0 += 1;
        e.1 += usize::from(p.codes()[5..].contains(&1));
    }
    for (key, (n, hits)) in direct {
        let row = stats.row(&key).unwrap();
        assert_eq!(row.threads, n);
        assert_eq!(row.reentry_rate, Some(hits as f64 / n as f64));
        assert_eq!(row.occurrence_share, n as f64 / 5.0);
    }
    let total: f64 = stats.rows.iter().map(|r| r.occurrence_share).sum();
    assert!((total - 1.0).abs() < 1e-12);
}
