//! Distinct-participant densities of the urn model at several reinforcement
//! strengths, next to a class-F model.
//!
//! cargo run --release --example simulate_models

use threadlab::analysis::{bimodality_gap, modes_default};
use threadlab::genmodels::{ensemble_density, ClassFParams, ModelSpec, SelectionRule, UrnParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k = 40;
    let runs = 20_000;
    println!("model            mean d   gap    modes");
    for alpha in [1.0, 1.5, 2.0, 4.0] {
        let density = ensemble_density(&ModelSpec::Urn(UrnParams::new(alpha, 1.0, k)?), runs, 1)?;
        let modes: Vec<usize> = modes_default(&density, runs).iter().map(|m| m.d).collect();
        println!(
            "urn alpha={alpha:<4}   {:>6.2}  {:.3}  {modes:?}",
            density.mean(),
            bimodality_gap(&density, k)
        );
    }

    let class_f = ClassFParams::new(vec![0.4; k], SelectionRule::RICH_GET_RICHER_DEFAULT)?;
    let density = ensemble_density(&ModelSpec::ClassF(class_f), runs, 1)?;
    let modes: Vec<usize> = modes_default(&density, runs).iter().map(|m| m.d).collect();
    println!(
        "class-F p=0.4    {:>6.2}  {:.3}  {modes:?}",
        density.mean(),
        bimodality_gap(&density, k)
    );
    Ok(())
}
