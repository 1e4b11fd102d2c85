//! Thread-grouped k-fold cross-validation of the length task.

use threadlab::corpus::{generate_synthetic_corpus, SynthConfig};
use threadlab::features::FeatureConfig;
use threadlab::learn::{cross_validate, length_dataset, CvConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SynthConfig {
        posters: 60,
        seed: 9,
        ..SynthConfig::default()
    })?;
    let data = length_dataset(&corpus, 5, 8, &FeatureConfig::for_population(corpus.population()))?;
    let report = cross_validate(
        &data,
        5,
        &CvConfig {
            n_trees: 30,
            ..CvConfig::default()
        },
    )?;
    for (i, f) in report.folds.iter().enumerate() {
        println!("fold {i}: ACC {:.3} AUC {:.3}", f.acc, f.auc);
    }
    println!(
        "mean:   ACC {:.3} AUC {:.3} (pooled: {})",
        report.mean.acc, report.mean.auc, report.pooled
    );
    Ok(())
}
