//! Choosing the token level at which edits are counted.
//!
//! At each level the consecutive-version edit masks of a history are joined
//! into one change sequence. Its run-length distribution of 1s is compared
//! with the distribution obtained after uniformly permuting the same bits;
//! the level whose observed runs are closest (Bhattacharyya distance) to
//! the shuffled ones is where adjacent edits stop clustering, i.e. where
//! each 1 is a distinct event.

use std::collections::BTreeMap;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::corpus::VersionHistory;
use crate::editdist::{edit_mask, edit_script, EditMask};
use crate::error::{Error, Result};
use crate::segment::{segment, Granularity};
use crate::stats::{derive_seed, seeded_rng};

pub const DEFAULT_SHUFFLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDistribution {
    pub probabilities: BTreeMap<usize, f64>,
    pub support_max: usize,
}

impl RunDistribution {
    pub fn from_counts(counts: &BTreeMap<usize, u64>) -> Option<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return None;
        }
        let probabilities = counts
            .iter()
            .filter(|(_, c)| **c > 0)
            .map(|(k, c)| (*k, *c as f64 / total as f64))
            .collect::<BTreeMap<_, _>>();
        let support_max = *probabilities.keys().next_back().expect("non-empty");
        Some(RunDistribution {
            probabilities,
            support_max,
        })
    }

    pub fn get(&self, run: usize) -> f64 {
        self.probabilities.get(&run).copied().unwrap_or(0.0)
    }
}

fn common_level(masks: &[EditMask]) -> Result<Granularity> {
    let Some(first) = masks.first() else {
        return Err(Error::NoEditEvents);
    };
    if let Some(other) = masks.iter().find(|m| m.level != first.level) {
        return Err(Error::LevelMismatch(first.level, other.level));
    }
    Ok(first.level)
}

/// Empirical distribution of maximal runs of 1s, pooled over `masks`.
pub fn run_distribution(masks: &[EditMask]) -> Result<RunDistribution> {
    let level = common_level(masks)?;
    let mut counts = BTreeMap::new();
    for m in masks {
        for r in m.runs() {
            *counts.entry(r).or_insert(0u64) += 1;
        }
    }
    RunDistribution::from_counts(&counts).ok_or(Error::NoEdits(level))
}

/// `-ln Σ sqrt(p_k q_k)`; infinite for disjoint supports.
pub fn bhattacharyya(p: &RunDistribution, q: &RunDistribution) -> f64 {
    let coefficient: f64 = p
        .probabilities
        .iter()
        .map(|(k, pk)| (pk * q.get(*k)).sqrt())
        .sum();
    if coefficient <= 0.0 {
        f64::INFINITY
    } else {
        // rounding can push the coefficient a hair above 1
        (-coefficient.ln()).max(0.0)
    }
}

/// Run distribution of uniformly permuted masks, pooled over `n_shuffles`
/// permutations of each mask.
///
/// A uniform permutation of a mask with `k` ones in `L` positions places the
/// ones on a uniformly random `k`-subset, so the subset is drawn directly.
pub fn shuffled_null(masks: &[EditMask], n_shuffles: usize, seed: u64) -> Result<RunDistribution> {
    let level = common_level(masks)?;
    if n_shuffles == 0 {
        return Err(Error::InvalidParameter(
            "n_shuffles must be at least 1".into(),
        ));
    }
    let mut rng = seeded_rng(seed);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut positions = Vec::new();
    for m in masks {
        let (len, ones) = (m.bits.len(), m.ones());
        if ones == 0 {
            continue;
        }
        for _ in 0..n_shuffles {
            positions.clear();
            positions.extend(index::sample(&mut rng, len, ones));
            positions.sort_unstable();
            let mut run = 1;
            for w in positions.windows(2) {
                if w[1] == w[0] + 1 {
                    run += 1;
                } else {
                    *counts.entry(run).or_insert(0) += 1;
                    run = 1;
                }
            }
            *counts.entry(run).or_insert(0) += 1;
        }
    }
    RunDistribution::from_counts(&counts).ok_or(Error::NoEdits(level))
}

/// Edit masks of every consecutive version pair at `level`.
pub fn level_masks(history: &VersionHistory, level: Granularity) -> Vec<EditMask> {
    let seqs: Vec<_> = history
        .versions
        .iter()
        .map(|v| segment(&v.text, level))
        .collect();
    seqs.windows(2)
        .map(|w| {
            let s = edit_script(&w[0], &w[1]).expect("same level");
            edit_mask(&s, level)
        })
        .collect()
}

/// Joins pair masks into one change sequence, with a single 0 between
/// pairs so no run spans two version transitions.
pub fn concatenate_masks(masks: &[EditMask], level: Granularity) -> EditMask {
    let mut bits = Vec::with_capacity(masks.iter().map(|m| m.bits.len() + 1).sum());
    for (k, m) in masks.iter().enumerate() {
        if k > 0 {
            bits.push(false);
        }
        bits.extend_from_slice(&m.bits);
    }
    EditMask { bits, level }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScore {
    pub level: Granularity,
    /// `None` when the level saw no edits.
    #[serde(serialize_with = "finite_or_null", deserialize_with = "finite_or_inf")]
    pub distance: Option<f64>,
    pub observed: Option<RunDistribution>,
    pub null: Option<RunDistribution>,
}

fn finite_or_null<S: Serializer>(d: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(v) if v.is_finite() => s.serialize_f64(*v),
        Some(_) => s.serialize_str("inf"),
        None => s.serialize_none(),
    }
}

fn finite_or_inf<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Num(v)) => Ok(Some(v)),
        Some(Raw::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
        Some(Raw::Text(t)) => Err(serde::de::Error::custom(format!("bad distance `{t}`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularityReport {
    pub scores: Vec<LevelScore>,
    pub selected: Granularity,
    /// Levels without a single edit, left out of the selection.
    pub skipped: Vec<Granularity>,
    pub n_shuffles: usize,
    pub seed: u64,
}

impl GranularityReport {
    pub fn distance(&self, level: Granularity) -> Option<f64> {
        self.scores
            .iter()
            .find(|s| s.level == level)
            .and_then(|s| s.distance)
    }

    /// `{level: distance}` over the levels that had edits.
    pub fn distances(&self) -> BTreeMap<Granularity, f64> {
        self.scores
            .iter()
            .filter_map(|s| s.distance.map(|d| (s.level, d)))
            .collect()
    }
}

fn score_level(
    history: &VersionHistory,
    level: Granularity,
    n_shuffles: usize,
    seed: u64,
) -> Result<LevelScore> {
    let joined = concatenate_masks(&level_masks(history, level), level);
    if joined.ones() == 0 {
        return Ok(LevelScore {
            level,
            distance: None,
            observed: None,
            null: None,
        });
    }
    let observed = run_distribution(std::slice::from_ref(&joined))?;
    let level_seed = derive_seed(seed, "granularity", level.name());
    let null = shuffled_null(std::slice::from_ref(&joined), n_shuffles, level_seed)?;
    Ok(LevelScore {
        level,
        distance: Some(bhattacharyya(&observed, &null)),
        observed: Some(observed),
        null: Some(null),
    })
}

/// Scores every requested level and picks the one whose edit runs are
/// closest to the shuffled null. Ties go to the coarser level.
pub fn select_granularity(
    history: &VersionHistory,
    levels: &[Granularity],
    n_shuffles: usize,
    seed: u64,
) -> Result<GranularityReport> {
    history.require_versions(2)?;
    if levels.is_empty() {
        return Err(Error::InvalidParameter(
            "no granularity levels requested".into(),
        ));
    }
    let mut levels = levels.to_vec();
    levels.sort();
    levels.dedup();
    let scores = levels
        .par_iter()
        .map(|&level| score_level(history, level, n_shuffles, seed))
        .collect::<Result<Vec<_>>>()?;

    let mut selected: Option<(Granularity, f64)> = None;
    for s in &scores {
        if let Some(d) = s.distance {
            if selected.is_none_or(|(_, best)| d <= best) {
                selected = Some((s.level, d));
            }
        }
    }
    let Some((selected, _)) = selected else {
        return Err(Error::NoEditEvents);
    };
    let skipped = scores
        .iter()
        .filter(|s| s.distance.is_none())
        .map(|s| s.level)
        .collect();
    Ok(GranularityReport {
        scores,
        selected,
        skipped,
        n_shuffles,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(bits: &str) -> EditMask {
        EditMask {
            bits: bits.chars().map(|c| c == '1').collect(),
            level: Granularity::Character,
        }
    }

    fn dist(pairs: &[(usize, f64)]) -> RunDistribution {
        RunDistribution {
            probabilities: pairs.iter().copied().collect(),
            support_max: pairs.iter().map(|p| p.0).max().unwrap(),
        }
    }

    #[test]
    fn run_distribution_examples() {
        let d = run_distribution(&[mask("0110"), mask("0100")]).unwrap();
        assert_eq!(d.probabilities, BTreeMap::from([(1, 0.5), (2, 0.5)]));
        assert_eq!(d.support_max, 2);
        let d = run_distribution(&[mask("1111")]).unwrap();
        assert_eq!(d.probabilities, BTreeMap::from([(4, 1.0)]));
        assert!(matches!(
            run_distribution(&[mask("0000")]),
            Err(Error::NoEdits(_))
        ));
    }

    #[test]
    fn bhattacharyya_examples() {
        let p = dist(&[(1, 0.5), (2, 0.5)]);
        assert_eq!(bhattacharyya(&p, &p), 0.0);
        assert_eq!(
            bhattacharyya(&dist(&[(1, 1.0)]), &dist(&[(2, 1.0)])),
            f64::INFINITY
        );
        let d = bhattacharyya(&p, &dist(&[(1, 1.0)]));
        assert!((d - (-(0.5f64).sqrt().ln())).abs() < 1e-12);
        assert!((d - 0.34657359).abs() < 1e-8);
    }

    #[test]
    fn shuffled_null_examples() {
        for seed in 0..5 {
            let d = shuffled_null(&[mask("10")], 10, seed).unwrap();
            assert_eq!(d.probabilities, BTreeMap::from([(1, 1.0)]));
        }
        assert!(matches!(
            shuffled_null(&[mask("0000")], 10, 1),
            Err(Error::NoEdits(_))
        ));
    }

    /// Exact null by enumerating every placement of the ones.
    fn enumerated_null(bits: &str) -> BTreeMap<usize, f64> {
        let len = bits.len();
        let ones = bits.chars().filter(|c| *c == '1').count();
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for subset in 0u32..(1 << len) {
            if subset.count_ones() as usize != ones {
                continue;
            }
            let placed: Vec<bool> = (0..len).map(|i| subset & (1 << i) != 0).collect();
            for r in crate::editdist::run_lengths(&placed) {
                *counts.entry(r).or_insert(0) += 1;
            }
        }
        RunDistribution::from_counts(&counts).unwrap().probabilities
    }

    #[test]
    fn shuffled_null_matches_enumeration() {
        // 6 placements of two ones in four slots: 3 adjacent (one run of
        // 2), 3 split (two runs of 1). Pooled over runs: P(2) = 3/9.
        let exact = enumerated_null("1100");
        assert_eq!(exact.len(), 2);
        assert!((exact[&2] - 1.0 / 3.0).abs() < 1e-12);

        let d = shuffled_null(&[mask("1100")], 20_000, 11).unwrap();
        for (k, p) in &exact {
            assert!(
                (d.get(*k) - p).abs() < 0.01,
                "run {k}: {} vs {p}",
                d.get(*k)
            );
        }
        // share of shuffles that contain an adjacent pair: 3 of 6
        let runs_per_shuffle = 1.0 / (d.get(2) / 1.0 + d.get(1) / 2.0);
        assert!((d.get(2) * runs_per_shuffle - 0.5).abs() < 0.01);

        let exact = enumerated_null("10110100");
        let d = shuffled_null(&[mask("10110100")], 20_000, 3).unwrap();
        for (k, p) in &exact {
            assert!(
                (d.get(*k) - p).abs() < 0.01,
                "run {k}: {} vs {p}",
                d.get(*k)
            );
        }
    }

    proptest! {
        #[test]
        fn bhattacharyya_symmetric_and_zero_on_identity(
            a in prop::collection::vec(1u64..20, 1..6),
            b in prop::collection::vec(1u64..20, 1..6),
        ) {
            let p = RunDistribution::from_counts(&a.iter().enumerate().map(|(k, c)| (k + 1, *c)).collect()).unwrap();
            let q = RunDistribution::from_counts(&b.iter().enumerate().map(|(k, c)| (k + 1, *c)).collect()).unwrap();
            prop_assert_eq!(bhattacharyya(&p, &q), bhattacharyya(&q, &p));
            prop_assert!(bhattacharyya(&p, &p) < 1e-12);
            if p != q {
                prop_assert!(bhattacharyya(&p, &q) > 0.0 || (p.probabilities.values().zip(q.probabilities.values()).all(|(x, y)| (x - y).abs() < 1e-12)));
            }
        }
    }
}
