//! Macro-averaged thread length conditioned on the friendships among the
//! first commenters and on the delay before the first comment.

use threadlab::analysis::{conditional_mean_length, quantile_edges, ConditionalOptions, Entity, Grouping, Response};
use threadlab::corpus::{generate_synthetic_corpus, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SynthConfig {
        posters: 100,
        seed: 11,
        ..SynthConfig::default()
    })?;
    let options = ConditionalOptions::default();

    let links = conditional_mean_length(
        &corpus,
        &Grouping::EdgesAmongFirst {
            k: 2,
            entity: Entity::Comments,
        },
        &options,
    )?;
    println!("length by edges among the first two commenters");
    links.write_csv(std::io::stdout().lock())?;

    let lags: Vec<f64> = corpus
        .threads()
        .iter()
        .filter_map(|t| t.comments.first().map(|c| (c.time - t.post.time) as f64))
        .collect();
    let buckets = quantile_edges(&lags, 5)?;
    let by_lag = conditional_mean_length(&corpus, &Grouping::FirstCommentLag { buckets }, &options)?;
    println!("\nlength by first-comment lag (seconds)");
    by_lag.write_csv(std::io::stdout().lock())?;

    let reentry = ConditionalOptions {
        response: Response::FirstCommenterReentry,
        ..ConditionalOptions::default()
    };
    let by_pattern = conditional_mean_length(&corpus, &Grouping::LengthTwoPattern, &reentry)?;
    println!("\nfirst-commenter re-entry by opening pair");
    by_pattern.write_csv(std::io::stdout().lock())?;
    Ok(())
}
