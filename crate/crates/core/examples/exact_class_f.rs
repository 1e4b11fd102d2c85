//! The exact distinct-participant distribution of a class-F model does not
//! depend on how existing participants are picked; simulations under three
//! selection rules all land on it.

use threadlab::genmodels::{
    ensemble_density, exact_distinct_distribution_class_f, ClassFParams, ModelSpec, SelectionRule,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // New-arrival probability drops as the thread grows.
    let p: Vec<f64> = (0..30).map(|j| 0.9 / (1.0 + 0.1 * j as f64)).collect();
    let exact = exact_distinct_distribution_class_f(&p)?;
    println!("exact mean distinct participants: {:.3}", exact.mean());

    for rule in [
        SelectionRule::Uniform,
        SelectionRule::RICH_GET_RICHER_DEFAULT,
        SelectionRule::RECENCY_DEFAULT,
    ] {
        let spec = ModelSpec::ClassF(ClassFParams::new(p.clone(), rule)?);
        let sim = ensemble_density(&spec, 50_000, 3)?;
        println!("{rule:<24} TV to exact {:.4}", sim.total_variation(&exact));
    }

    let mut stdout = std::io::stdout().lock();
    exact.write_csv(&mut stdout)?;
    Ok(())
}
