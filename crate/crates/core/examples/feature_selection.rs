//! Greedy forward selection: adds the feature that most improves
//! validation AUC until the gain vanishes.

use threadlab::corpus::{generate_synthetic_corpus, SynthConfig};
use threadlab::features::FeatureConfig;
use threadlab::learn::{build_length_task, stepwise_forward_selection, SelectionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SynthConfig {
        posters: 60,
        seed: 4,
        ..SynthConfig::default()
    })?;
    let features = FeatureConfig::for_population(corpus.population());
    let (train, validation) = build_length_task(&corpus, 5, 8, &features, 4, 0.5)?;
    let config = SelectionConfig {
        inner_trees: 10,
        final_trees: 30,
        ..SelectionConfig::default()
    };
    let steps = stepwise_forward_selection(&train, &validation, train.feature_names(), 5, &config)?;
    for (i, s) in steps.iter().enumerate() {
        println!("{:>2}. {:<20} AUC {:.3}", i + 1, s.feature, s.auc);
    }
    Ok(())
}
