use rayon::prelude::*;

use super::{ModelError, ModelSpec, Result};
use crate::analysis::Density;
use crate::patterns::ArrivalPattern;
use crate::rng::{substream, Domain};

/// Empirical distribution of distinct participants (poster included) over
/// `runs` simulations. Run `i` draws from substream `(master_seed, i)` and
/// histograms are merged with integer counts, so the result does not depend
/// on how the runs are scheduled.
pub fn ensemble_density(model: &ModelSpec, runs: usize, master_seed: u64) -> Result<Density> {
    if runs == 0 {
        return Err(ModelError::InvalidParameter("ensemble needs at least one run".into()));
    }
    let bins = model.k() + 2;
    let counts = (0..runs as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut hist, i| {
                let mut rng = substream(master_seed, Domain::Ensemble, i);
                hist[model.simulate(&mut rng).distinct_participants(true)] += 1;
                hist
            },
        )
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(Density::from_counts(&counts)?)
}

/// The simulated patterns themselves, in run order.
pub fn ensemble_patterns(model: &ModelSpec, runs: usize, master_seed: u64) -> Vec<ArrivalPattern> {
    (0..runs as u64)
        .into_par_iter()
        .map(|i| model.simulate(&mut substream(master_seed, Domain::Ensemble, i)))
        .collect()
}
