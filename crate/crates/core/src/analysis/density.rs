use std::io::Write;

use super::{AnalysisError, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Probability mass function over non-negative integers; index `d` holds
/// the mass at `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    mass: Vec<f64>,
}

impl Density {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(AnalysisError::InvalidDensity("no support".into()));
        }
        if let Some((d, m)) = mass.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0) {
            return Err(AnalysisError::InvalidDensity(format!("mass {m} at d={d}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(AnalysisError::InvalidDensity(format!("masses sum to {total}")));
        }
        Ok(Self { mass })
    }

    /// Normalised histogram.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(AnalysisError::EmptyInput);
        }
        Ok(Self {
            mass: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        })
    }

    pub fn point(d: usize) -> Self {
        let mut mass = vec![0.0; d + 1];
        mass[d] = 1.0;
        Self { mass }
    }

    /// Mass at `d`; zero outside the stored range.
    pub fn mass(&self, d: usize) -> f64 {
        self.mass.get(d).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Largest `d` with stored mass (possibly zero).
    pub fn max_d(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.mass.iter().enumerate().map(|(d, m)| d as f64 * m).sum()
    }

    pub fn total_variation(&self, other: &Density) -> f64 {
        let n = self.mass.len().max(other.mass.len());
        0.5 * (0..n).map(|d| (self.mass(d) - other.mass(d)).abs()).sum::<f64>()
    }

    /// Centred moving average with zero padding, renormalised.
    pub fn smoothed(&self, window: usize) -> Density {
        let half = window / 2;
        let n = self.mass.len() + half;
        let mut out = vec![0.0; n];
        for (d, slot) in out.iter_mut().enumerate() {
            let lo = d.saturating_sub(half);
            let hi = d + half;
            let s: f64 = (lo..=hi).map(|i| self.mass(i)).sum();
            *slot = s / window as f64;
        }
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|m| *m /= total);
        Density { mass: out }
    }

    /// Two-column `d,mass` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "d,mass")?;
        for (d, m) in self.mass.iter().enumerate() {
            writeln!(w, "{d},{m:.9}")?;
        }
        w.flush()
    }
}

/// A local maximum of a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub d: usize,
    pub mass: f64,
    pub prominence: f64,
}

/// Sampling-noise floor for a peak of mass `peak_mass` estimated from
/// `samples` draws: `max(0.005, 3 * sqrt(p(1-p)/M))`.
pub fn default_min_prominence(peak_mass: f64, samples: usize) -> f64 {
    let se = (peak_mass * (1.0 - peak_mass) / samples.max(1) as f64).sqrt();
    (3.0 * se).max(0.005)
}

/// Local maxima whose prominence is at least `min_prominence`, sorted by `d`.
///
/// Runs of equal mass are merged into one plateau, reported at its
/// midpoint. Prominence is the drop from the peak to the higher of the two
/// valleys separating it from higher ground (or from the edge of the support
/// when no higher point exists on that side); a peak at the edge only has
/// one valley.
pub fn modes(density: &Density, min_prominence: f64) -> Vec<Mode> {
    find_peaks(density)
        .into_iter()
        .filter(|m| m.prominence >= min_prominence)
        .collect()
}

/// [`modes`] with the per-peak threshold from [`default_min_prominence`].
pub fn modes_default(density: &Density, samples: usize) -> Vec<Mode> {
    find_peaks(density)
        .into_iter()
        .filter(|m| m.prominence >= default_min_prominence(m.mass, samples))
        .collect()
}

fn find_peaks(density: &Density) -> Vec<Mode> {
    // (first d, last d, mass)
    let mut runs: Vec<(usize, usize, f64)> = Vec::new();
    for (d, &m) in density.masses().iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.2 == m => run.1 = d,
            _ => runs.push((d, d, m)),
        }
    }
    let mut peaks = Vec::new();
    for i in 0..runs.len() {
        let v = runs[i].2;
        let left_lower = i == 0 || runs[i - 1].2 < v;
        let right_lower = i + 1 == runs.len() || runs[i + 1].2 < v;
        if !(left_lower && right_lower) || v <= 0.0 {
            continue;
        }
        let valley = |iter: &mut dyn Iterator<Item = usize>| -> Option<f64> {
            let mut low: Option<f64> = None;
            for j in iter {
                if runs[j].2 > v {
                    break;
                }
                low = Some(low.map_or(runs[j].2, |l: f64| l.min(runs[j].2)));
            }
            low
        };
        let left = valley(&mut (0..i).rev());
        let right = valley(&mut (i + 1..runs.len()));
        let base = match (left, right) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0.0,
        };
        peaks.push(Mode {
            d: (runs[i].0 + runs[i].1) / 2,
            mass: v,
            prominence: v - base,
        });
    }
    peaks
}

/// True iff the mass is non-decreasing up to some `d*` and non-increasing
/// after it.
pub fn is_unimodal(density: &Density) -> bool {
    let m = density.masses();
    let mut i = 1;
    while i < m.len() && m[i] >= m[i - 1] {
        i += 1;
    }
    while i < m.len() && m[i] <= m[i - 1] {
        i += 1;
    }
    i >= m.len()
}

/// Mass on `d` with `p*k <= d <= q*k`.
pub fn quantile_mass(density: &Density, p: f64, q: f64, k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) || p > q {
        return Err(AnalysisError::InvalidQuantiles { p, q });
    }
    let (lo, hi) = (p * k as f64 - 1e-9, q * k as f64 + 1e-9);
    Ok(density
        .masses()
        .iter()
        .enumerate()
        .filter(|(d, _)| (*d as f64) >= lo && (*d as f64) <= hi)
        .map(|(_, m)| m)
        .sum())
}

/// Extreme-quartile mass minus middle-quartile mass:
/// `f(0,1/4) + f(3/4,1) - f(1/4,1/2) - f(1/2,3/4)`.
pub fn bimodality_gap(density: &Density, k: usize) -> f64 {
    let f = |p, q| quantile_mass(density, p, q, k).expect("fixed quartiles are valid");
    f(0.0, 0.25) + f(0.75, 1.0) - f(0.25, 0.5) - f(0.5, 0.75)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dens(pairs: &[(usize, f64)]) -> Density {
        let n = pairs.iter().map(|p| p.0).max().unwrap() + 1;
        let mut v = vec![0.0; n];
        for &(d, m) in pairs {
            v[d] = m;
        }
        Density::new(v).unwrap()
    }

    #[test]
    fn rejects_bad_masses() {
        assert!(Density::new(vec![0.5, 0.4]).is_err());
        assert!(Density::new(vec![1.5, -0.5]).is_err());
        assert!(Density::new(vec![]).is_err());
        assert!(Density::from_counts(&[0, 0]).is_err());
    }

    #[test]
    fn point_mass_has_one_mode_and_is_unimodal() {
        let p = Density::point(4);
        let m = modes(&p, 0.0);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].d, 4);
        assert!(is_unimodal(&p));
    }

    #[test]
    fn two_peaked_example() {
        // Hand evaluation: peak d=1 (0.3) has valleys 0 (left edge, d=0) and
        // 0.05 (before the higher d=4), prominence 0.25; peak d=4 (0.4) has
        // only a left valley at 0, prominence 0.4. d=3 is not a local max.
        let d = dens(&[(1, 0.3), (2, 0.05), (3, 0.25), (4, 0.4)]);
        let m = modes(&d, 0.1);
        assert_eq!(m.iter().map(|m| m.d).collect::<Vec<_>>(), vec![1, 4]);
        assert!((m[0].prominence - 0.25).abs() < 1e-12);
        assert!((m[1].prominence - 0.4).abs() < 1e-12);
        assert!(!is_unimodal(&d));
    }

    #[test]
    fn decreasing_density_has_single_mode_at_start() {
        let d = dens(&[(2, 0.4), (3, 0.3), (4, 0.2), (5, 0.1)]);
        let m = modes(&d, 0.0);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].d, 2);
        assert!(is_unimodal(&d));
    }

    #[test]
    fn plateaus_merge() {
        let d = dens(&[(0, 0.1), (1, 0.35), (2, 0.35), (3, 0.2)]);
        let m = modes(&d, 0.0);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].d, 1);
    }

    #[test]
    fn quantile_masses() {
        let k = 8;
        let uniform = Density::new(vec![1.0 / 9.0; 9]).unwrap();
        assert!((quantile_mass(&uniform, 0.0, 1.0, k).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(quantile_mass(&Density::point(4), 0.0, 0.25, 16).unwrap(), 1.0);
        assert!(quantile_mass(&uniform, 0.6, 0.5, k).is_err());
    }

    #[test]
    fn smoothing_preserves_mass_and_spreads() {
        let s = Density::point(3).smoothed(3);
        assert!((s.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((s.mass(2) - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.mass(4) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn total_variation_of_disjoint_points_is_one() {
        assert_eq!(Density::point(1).total_variation(&Density::point(3)), 1.0);
        assert_eq!(Density::point(2).total_variation(&Density::point(2)), 0.0);
    }

    #[test]
    fn prominence_floor() {
        assert_eq!(default_min_prominence(0.01, 1_000_000), 0.005);
        let p = default_min_prominence(0.5, 100);
        assert!((p - 0.15).abs() < 1e-12);
    }
}
