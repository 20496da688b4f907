//! Distance from a shortest edit path.
//!
//! For version `t` of a history with first version `0` and last version
//! `f`, the detour through `t` costs `h(t) = (d(0,t) + d(t,f) - d(0,f)) /
//! d(0,f)` in character edit distance. The triangle inequality makes
//! `h >= 0`, with equality exactly when `t` lies on some shortest path. The
//! exploration coefficient averages `h` over all versions, endpoints
//! included.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::VersionHistory;
use crate::editdist::distance;
use crate::error::{Error, Result};
use crate::stats::{mean_curve_with_band, pearson, Correlation, GriddedCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationCurve {
    pub author_id: String,
    /// Distance from the first version, per version.
    pub d0t: Vec<usize>,
    /// Distance to the last version, per version.
    pub dtf: Vec<usize>,
    pub d0f: usize,
    pub h_values: Vec<f64>,
    pub coefficient_e: f64,
}

impl ExplorationCurve {
    /// Number of versions, the divisor of the coefficient.
    pub fn n_versions(&self) -> usize {
        self.h_values.len()
    }

    /// Normalised time `t / (n - 1)` so both endpoints land on 0 and 1.
    pub fn normalized_time(&self) -> Vec<f64> {
        let span = (self.n_versions() - 1).max(1) as f64;
        (0..self.n_versions()).map(|t| t as f64 / span).collect()
    }
}

pub fn exploration_curve(history: &VersionHistory) -> Result<ExplorationCurve> {
    history.require_versions(2)?;
    let chars: Vec<Vec<char>> = history
        .versions
        .iter()
        .map(|v| v.text.chars().collect())
        .collect();
    let first = &chars[0];
    let last = &chars[chars.len() - 1];
    let d0f = distance(first, last);
    if d0f == 0 {
        return Err(Error::ZeroEndpointDistance);
    }
    let (d0t, dtf): (Vec<usize>, Vec<usize>) = chars
        .par_iter()
        .map(|c| (distance(first, c), distance(c, last)))
        .unzip();
    let h_values: Vec<f64> = d0t
        .iter()
        .zip(&dtf)
        .map(|(a, b)| (a + b - d0f) as f64 / d0f as f64)
        .collect();
    let coefficient_e = h_values.iter().sum::<f64>() / h_values.len() as f64;
    Ok(ExplorationCurve {
        author_id: history.author_id.clone(),
        d0t,
        dtf,
        d0f,
        h_values,
        coefficient_e,
    })
}

/// Mean `h(u)` across authors on a uniform grid, with a bootstrap band
/// from resampling authors.
pub fn mean_exploration_curve(
    curves: &[ExplorationCurve],
    grid_points: usize,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<GriddedCurve> {
    let profiles: Vec<(Vec<f64>, Vec<f64>)> = curves
        .iter()
        .map(|c| (c.normalized_time(), c.h_values.clone()))
        .collect();
    mean_curve_with_band(&profiles, grid_points, n_boot, level, seed)
}

/// Pearson correlation of the coefficient against the version count.
pub fn exploration_vs_versions(curves: &[ExplorationCurve]) -> Result<Correlation> {
    let e: Vec<f64> = curves.iter().map(|c| c.coefficient_e).collect();
    let n: Vec<f64> = curves.iter().map(|c| c.n_versions() as f64).collect();
    pearson(&e, &n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(texts: &[&str]) -> Result<ExplorationCurve> {
        exploration_curve(&VersionHistory::from_texts("t", texts))
    }

    #[test]
    fn append_only_has_no_detour() {
        let c = curve(&["a", "ab", "abc"]).unwrap();
        assert_eq!(c.d0f, 2);
        assert_eq!(c.h_values, vec![0.0, 0.0, 0.0]);
        assert_eq!(c.coefficient_e, 0.0);
    }

    #[test]
    fn detour_through_unrelated_text() {
        let c = curve(&["a", "XYZ", "ab"]).unwrap();
        assert_eq!((c.d0t[1], c.dtf[1], c.d0f), (3, 3, 1));
        assert_eq!(c.h_values[1], 5.0);
        assert!((c.coefficient_e - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_endpoints_rejected() {
        assert!(matches!(
            curve(&["ab", "xyz", "ab"]),
            Err(Error::ZeroEndpointDistance)
        ));
    }

    #[test]
    fn write_then_delete_half_explores() {
        let c = curve(&["ab", "abcdefgh", "abcd"]).unwrap();
        assert!(c.coefficient_e > 0.0);
    }

    #[test]
    fn mean_curve_examples() {
        let a = curve(&["a", "XYZ", "ab"]).unwrap();
        let m = mean_exploration_curve(&[a.clone(), a.clone()], 101, 300, 0.995, 4).unwrap();
        let single = crate::stats::interpolate(&a.normalized_time(), &a.h_values, &m.u);
        assert_eq!(m.mean, single);
        assert!(m.ci_low.iter().zip(&m.ci_high).all(|(l, h)| l == h));

        let z = curve(&["a", "ab", "abc"]).unwrap();
        let m = mean_exploration_curve(&[z.clone(), z], 101, 300, 0.995, 4).unwrap();
        assert!(m.mean.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn correlation_examples() {
        // E proportional to the version count
        let make = |n: usize, e: f64| ExplorationCurve {
            author_id: String::new(),
            d0t: vec![0; n],
            dtf: vec![0; n],
            d0f: 1,
            h_values: vec![e; n],
            coefficient_e: e,
        };
        let curves: Vec<_> = (3..8).map(|n| make(n, 0.1 * n as f64)).collect();
        assert!((exploration_vs_versions(&curves).unwrap().r - 1.0).abs() < 1e-12);
        let flat: Vec<_> = (3..8).map(|n| make(n, 0.2)).collect();
        assert!(matches!(
            exploration_vs_versions(&flat),
            Err(Error::ZeroVariance)
        ));
    }

    proptest! {
        #[test]
        fn detours_are_non_negative(texts in prop::collection::vec("[ab ]{0,12}", 2..7)) {
            let h = VersionHistory::from_texts("p", &texts);
            if let Ok(c) = exploration_curve(&h) {
                prop_assert!(c.h_values.iter().all(|v| *v >= 0.0));
                prop_assert_eq!(c.h_values[0], 0.0);
                prop_assert_eq!(*c.h_values.last().unwrap(), 0.0);
            }
        }

        #[test]
        fn invariant_under_character_bijection(texts in prop::collection::vec("[ab]{0,10}", 3..6)) {
            let swapped: Vec<String> = texts
                .iter()
                .map(|t| t.chars().map(|c| if c == 'a' { 'q' } else { 'z' }).collect())
                .collect();
            let a = exploration_curve(&VersionHistory::from_texts("p", &texts));
            let b = exploration_curve(&VersionHistory::from_texts("p", &swapped));
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.h_values, b.h_values),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "bijection changed feasibility"),
            }
        }
    }
}
