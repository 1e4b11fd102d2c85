//! Encodes threads as arrival patterns and tabulates how often the first
//! commenter comes back after each five-comment opening.

use threadlab::corpus::{Comment, Post, Thread};
use threadlab::genmodels::{ensemble_patterns, ModelSpec, UrnParams};
use threadlab::patterns::{encode_arrival_pattern, pattern_reentry_stats_from_patterns};

fn thread(poster: &str, authors: &[&str]) -> Thread {
    Thread {
        thread_id: "demo".into(),
        poster_id: poster.into(),
        post: Post {
            text: "hello".into(),
            time: 0,
        },
        comments: authors
            .iter()
            .zip(1..)
            .map(|(a, time)| Comment {
                author_id: a.to_string(),
                text: String::new(),
                time,
                likes: 0,
            })
            .collect(),
        post_likes: Vec::new(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let focused = thread("Mary", &["Mary", "Don", "Pat", "Don", "Pat"]);
    let guestbook = thread("James", &["Dina", "Fred", "Mia", "Moe", "James"]);
    for t in [&focused, &guestbook] {
        let p = encode_arrival_pattern(t);
        println!(
            "{:<6} -> {p}  ({} participants)",
            t.poster_id,
            p.distinct_participants(true)
        );
    }

    let patterns = ensemble_patterns(&ModelSpec::Urn(UrnParams::new(4.0, 1.0, 30)?), 20_000, 5);
    let stats = pattern_reentry_stats_from_patterns(&patterns, 5, false)?;
    println!(
        "\n{} simulated threads; most and least re-entrant openings:",
        stats.eligible_threads
    );
    let with_rate: Vec<_> = stats.rows.iter().filter(|r| r.reentry_rate.is_some()).collect();
    for r in with_rate.iter().take(3).chain(with_rate.iter().rev().take(3)) {
        println!(
            "  {:<10} rate {:.3}  share {:.4}",
            r.key,
            r.reentry_rate.unwrap(),
            r.occurrence_share
        );
    }
    Ok(())
}
