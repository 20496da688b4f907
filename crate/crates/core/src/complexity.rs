//! Process complexity: normalised Shannon entropy of where the edits fell.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{build_cloud, WritingCloud};
use crate::corpus::VersionHistory;
use crate::error::{Error, Result};
use crate::segment::Granularity;
use crate::stats::{derive_seed, quantile_sorted, seeded_rng};

pub const DEFAULT_PERMUTATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub sw_index: f64,
    /// Entropy in nats before normalisation.
    pub raw_entropy: f64,
    pub n_columns: usize,
    pub total_edits: u64,
    pub null_distribution: Vec<f64>,
    pub seed: u64,
}

impl ComplexityReport {
    /// Share of null samples strictly below the observed index.
    pub fn null_rank(&self) -> f64 {
        if self.null_distribution.is_empty() {
            return f64::NAN;
        }
        let below = self
            .null_distribution
            .iter()
            .filter(|v| **v < self.sw_index)
            .count();
        below as f64 / self.null_distribution.len() as f64
    }

    /// Null quantile under the same inverse-CDF rule as the bootstrap.
    pub fn null_quantile(&self, q: f64) -> f64 {
        let mut sorted = self.null_distribution.clone();
        sorted.sort_by(f64::total_cmp);
        quantile_sorted(&sorted, q)
    }
}

fn entropy_of_counts(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if counts.is_empty() || total == 0 {
        return Err(Error::NoEditEvents);
    }
    let total = total as f64;
    // `0.0 - x` rather than `-x` keeps a zero sum at +0.
    Ok(0.0
        - counts
            .iter()
            .filter(|c| **c > 0)
            .map(|c| {
                let p = *c as f64 / total;
                p * p.ln()
            })
            .sum::<f64>())
}

/// Entropy of the edit counts divided by `ln(len)`; zero-count columns
/// still count towards the normalisation. A single column scores 0.
pub fn shannon_wiener(edit_counts: &[u64]) -> Result<f64> {
    let h = entropy_of_counts(edit_counts)?;
    if edit_counts.len() == 1 {
        return Ok(0.0);
    }
    Ok((h / (edit_counts.len() as f64).ln()).clamp(0.0, 1.0))
}

/// One equiprobable multinomial draw, by successive conditional binomials.
fn multinomial_uniform(total: u64, k: usize, rng: &mut impl rand::Rng) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut remaining = total;
    for i in 0..k {
        let left = (k - i) as f64;
        let x = if i + 1 == k || remaining == 0 {
            remaining
        } else {
            Binomial::new(remaining, 1.0 / left)
                .expect("valid binomial")
                .sample(rng)
        };
        out.push(x);
        remaining -= x;
    }
    out
}

/// Index values after scattering `total_edits` uniformly over `n_columns`.
/// Permutation `k` draws from its own derived stream.
pub fn null_from_counts(
    n_columns: usize,
    total_edits: u64,
    n_perm: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_perm == 0 {
        return Err(Error::InvalidParameter("n_perm must be at least 1".into()));
    }
    if n_columns == 0 || total_edits == 0 {
        return Err(Error::NoEditEvents);
    }
    Ok((0..n_perm)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeded_rng(derive_seed(seed, "complexity-null", &k.to_string()));
            let counts = multinomial_uniform(total_edits, n_columns, &mut rng);
            shannon_wiener(&counts).expect("total is positive")
        })
        .collect())
}

pub fn null_complexity(history: &VersionHistory, n_perm: usize, seed: u64) -> Result<Vec<f64>> {
    let cloud = build_cloud(history, Granularity::Sentence)?;
    null_from_counts(cloud.n_columns, cloud.total_edits(), n_perm, seed)
}

pub fn complexity_report(
    cloud: &WritingCloud,
    n_perm: usize,
    seed: u64,
) -> Result<ComplexityReport> {
    let sw_index = shannon_wiener(&cloud.edit_counts)?;
    Ok(ComplexityReport {
        sw_index,
        raw_entropy: entropy_of_counts(&cloud.edit_counts)?,
        n_columns: cloud.n_columns,
        total_edits: cloud.total_edits(),
        null_distribution: null_from_counts(cloud.n_columns, cloud.total_edits(), n_perm, seed)?,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn index_examples() {
        assert_eq!(shannon_wiener(&[5, 0, 0, 0]).unwrap(), 0.0);
        assert!((shannon_wiener(&[2, 2, 2, 2]).unwrap() - 1.0).abs() < 1e-12);
        let expected = (-0.5 * 0.5f64.ln() - 2.0 * 0.25 * 0.25f64.ln()) / 3f64.ln();
        assert!((shannon_wiener(&[2, 1, 1]).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.9464).abs() < 1e-4);
        assert_eq!(shannon_wiener(&[7]).unwrap(), 0.0);
        assert!(matches!(shannon_wiener(&[0, 0]), Err(Error::NoEditEvents)));
    }

    #[test]
    fn null_examples() {
        assert!(null_from_counts(10, 1, 50, 3)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        assert!(null_from_counts(1, 40, 50, 3)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        let big = null_from_counts(50, 5000, 1000, 11).unwrap();
        assert!(big.iter().sum::<f64>() / 1000.0 > 0.95);
        assert_eq!(big, null_from_counts(50, 5000, 1000, 11).unwrap());
    }

    #[test]
    fn multinomial_conserves_mass() {
        let mut rng = seeded_rng(5);
        for total in [0u64, 1, 17, 1000] {
            let draw = multinomial_uniform(total, 7, &mut rng);
            assert_eq!(draw.len(), 7);
            assert_eq!(draw.iter().sum::<u64>(), total);
        }
    }

    #[test]
    fn multinomial_is_equiprobable() {
        // Marginal mean of each cell is total / k.
        let mut rng = seeded_rng(9);
        let mut sums = [0u64; 5];
        for _ in 0..4000 {
            for (s, x) in sums.iter_mut().zip(multinomial_uniform(10, 5, &mut rng)) {
                *s += x;
            }
        }
        for s in sums {
            assert!((s as f64 / 4000.0 - 2.0).abs() < 0.1, "{s}");
        }
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut counts in prop::collection::vec(0u64..20, 1..30), seed in any::<u64>()) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let before = shannon_wiener(&counts).unwrap();
            let mut rng = seeded_rng(seed);
            rand::seq::SliceRandom::shuffle(counts.as_mut_slice(), &mut rng);
            prop_assert!((shannon_wiener(&counts).unwrap() - before).abs() < 1e-12);
        }

        #[test]
        fn strictly_positive_when_spread(counts in prop::collection::vec(0u64..20, 2..30)) {
            let nonzero = counts.iter().filter(|c| **c > 0).count();
            prop_assume!(nonzero >= 2);
            let sw = shannon_wiener(&counts).unwrap();
            prop_assert!(sw > 0.0 && sw <= 1.0);
        }
    }
}
