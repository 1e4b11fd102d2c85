//! Per-user average number of distinct participants in the first k
//! comments, as a k-by-d heat map.

use threadlab::analysis::{heatmap, quantile_mass};
use threadlab::corpus::{generate_synthetic_corpus, LengthDistribution, SynthConfig};
use threadlab::genmodels::ArrivalModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(&SynthConfig {
        posters: 200,
        posts_per_poster: 5,
        model: ArrivalModel::Mixture {
            components: vec![(1.0, ArrivalModel::urn(1.5, 1.0)), (1.0, ArrivalModel::urn(4.0, 1.0))],
        },
        lengths: LengthDistribution::Uniform { min: 20, max: 80 },
        seed: 3,
        ..SynthConfig::default()
    })?;
    let map = heatmap(&corpus, 30)?;
    println!("k   users-mean  lower-quarter  upper-quarter");
    for (k, column) in map.columns().filter(|(k, _)| k % 5 == 0) {
        let Some(d) = column else {
            println!("{k:<3} (no eligible users)");
            continue;
        };
        println!(
            "{k:<3} {:>10.2}  {:>13.3}  {:>13.3}",
            d.mean(),
            quantile_mass(d, 0.0, 0.25, k)?,
            quantile_mass(d, 0.75, 1.0, k)?
        );
    }
    map.write_csv(std::fs::File::create(
        std::env::temp_dir().join("threadlab-heatmap.csv"),
    )?)?;
    Ok(())
}
