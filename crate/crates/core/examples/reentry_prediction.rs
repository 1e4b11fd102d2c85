//! Predicts whether the first commenter comes back after the first five
//! comments.

use threadlab::corpus::{generate_synthetic_corpus, SynthConfig};
use threadlab::features::FeatureConfig;
use threadlab::genmodels::ArrivalModel;
use threadlab::learn::{build_reentry_task, evaluate, positive_bias_baseline, train_bagged_trees, Scorer, TreeParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SynthConfig {
        posters: 100,
        model: ArrivalModel::Mixture {
            components: vec![(1.0, ArrivalModel::urn(1.5, 1.0)), (1.0, ArrivalModel::urn(4.0, 1.0))],
        },
        seed: 2,
        ..SynthConfig::default()
    })?;
    let features = FeatureConfig::for_population(corpus.population());
    let (train, test) = build_reentry_task(&corpus, 5, 1, &features, 2, 0.5)?;
    println!(
        "{} training threads, {:.1}% re-entries",
        train.len(),
        100.0 * train.positives() as f64 / train.len() as f64
    );
    let model = train_bagged_trees(&train, 60, TreeParams::default(), 2)?;
    let trees = evaluate(&model.score_all(&test), test.labels(), 0.5)?;
    let base = evaluate(
        &positive_bias_baseline(train.labels())?.score_all(&test),
        test.labels(),
        0.5,
    )?;
    println!("bagged trees  AUC {:.3}  APR {:.3}", trees.auc, trees.apr);
    println!("baseline      AUC {:.3}  APR {:.3}", base.auc, base.apr);
    Ok(())
}
