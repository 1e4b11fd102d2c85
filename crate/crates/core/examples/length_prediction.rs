//! Predicts from the first five comments whether a thread reaches eight,
//! compares against the constant positive-rate baseline and saves the model.

use threadlab::corpus::{generate_synthetic_corpus, SynthConfig};
use threadlab::features::FeatureConfig;
use threadlab::genmodels::ArrivalModel;
use threadlab::learn::{
    build_length_task, evaluate, positive_bias_baseline, train_bagged_trees, write_metrics_table, Scorer, TreeEnsemble,
    TreeParams, DEFAULT_TREES,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SynthConfig {
        posters: 100,
        model: ArrivalModel::Mixture {
            components: vec![(1.0, ArrivalModel::urn(1.5, 1.0)), (1.0, ArrivalModel::urn(4.0, 1.0))],
        },
        seed: 1,
        ..SynthConfig::default()
    })?;
    let features = FeatureConfig::for_population(corpus.population());
    let (train, test) = build_length_task(&corpus, 5, 8, &features, 1, 0.5)?;
    println!("{} training and {} test threads", train.len(), test.len());

    let model = train_bagged_trees(&train, DEFAULT_TREES, TreeParams::default(), 1)?;
    let baseline = positive_bias_baseline(train.labels())?;
    let rows = [
        ("bagged-trees", evaluate(&model.score_all(&test), test.labels(), 0.5)?),
        (
            "positive-bias",
            evaluate(&baseline.score_all(&test), test.labels(), 0.5)?,
        ),
    ];
    write_metrics_table(std::io::stdout().lock(), &rows)?;

    let path = std::env::temp_dir().join("threadlab-length-model.json");
    model.write_json(std::fs::File::create(&path)?)?;
    let reloaded = TreeEnsemble::read_json(std::fs::File::open(&path)?)?;
    println!(
        "reloaded model scores match: {}",
        reloaded.score_all(&test) == model.score_all(&test)
    );
    Ok(())
}
