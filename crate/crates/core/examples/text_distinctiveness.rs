//! Scores posts against a background language model and picks post terms
//! associated with longer threads.
//!
//! Synthetic post text carries no length signal, so one term is planted.

use threadlab::analysis::{conditional_mean_length, quantile_edges, ConditionalOptions, Grouping};
use threadlab::corpus::{generate_synthetic_corpus, SynthConfig};
use threadlab::features::{post_distinctiveness, select_terms_elastic_net, train_unigram_lm, ElasticNetConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SynthConfig {
        posters: 60,
        seed: 5,
        ..SynthConfig::default()
    })?;
    // Comments serve as the background text.
    let background: Vec<&str> = corpus
        .threads()
        .iter()
        .flat_map(|t| t.comments.iter().map(|c| c.text.as_str()))
        .collect();
    let lm = train_unigram_lm(&background, 1e-6)?;
    println!("background vocabulary: {} terms", lm.vocabulary_size());

    let scores: Vec<f64> = corpus
        .threads()
        .iter()
        .map(|t| post_distinctiveness(&t.post.text, &lm))
        .collect::<Result<_, _>>()?;
    let grouping = Grouping::PostDistinctiveness {
        lm: &lm,
        buckets: quantile_edges(&scores, 4)?,
        min_words: 5,
        min_comments: 1,
    };
    conditional_mean_length(&corpus, &grouping, &ConditionalOptions::default())?.write_csv(std::io::stdout().lock())?;

    // Plant a term on the posts of long threads so the fit has something to find.
    let posts: Vec<String> = corpus
        .threads()
        .iter()
        .map(|t| {
            if t.len() >= 15 {
                format!("{} giveaway", t.post.text)
            } else {
                t.post.text.clone()
            }
        })
        .collect();
    let lengths: Vec<usize> = corpus.threads().iter().map(|t| t.len()).collect();
    let fit = select_terms_elastic_net(
        &posts,
        &lengths,
        &ElasticNetConfig {
            max_terms: 10,
            ..ElasticNetConfig::default()
        },
    )?;
    println!("\npenalty {:.4} selected:", fit.selection.lambda);
    for (term, coef) in &fit.selection.terms {
        println!("  {term:<12} {coef:+.4}");
    }
    Ok(())
}
