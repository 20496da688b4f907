//! Versions as points in edit-distance space.
//!
//! Each interior version `B` with neighbours `A` and `C` forms a triangle;
//! the angle at `B` is 180° when `B` lies on a shortest path from `A` to `C`
//! (fluent forward writing) and shrinks as the writer backtracks. Angles
//! come either straight from the metric via the law of cosines or from a
//! t-SNE embedding of the full distance matrix.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::VersionHistory;
use crate::editdist::distance;
use crate::error::{Error, Result};
use crate::segment::{segment, Granularity};
use crate::stats::{pearson, seeded_rng, Correlation};

pub const DEFAULT_FLOW_BAND_DEG: f64 = 30.0;

/// Symmetric matrix of pairwise distances, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub n: usize,
    pub entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates finiteness, non-negativity, symmetry and the zero diagonal.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::LengthMismatch(n * n, entries.len()));
        }
        if entries.iter().any(|d| !d.is_finite()) {
            return Err(Error::NonFiniteDistance);
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {i} is not zero"
                )));
            }
            for j in 0..i {
                let d = entries[i * n + j];
                if d < 0.0 || d != entries[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i},{j}) breaks symmetry"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { n, entries })
    }

    /// Euclidean distances between points.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = euclidean(&points[i], &points[j]);
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        Self::new(n, entries)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n, self.entries.iter().map(|d| d * factor).collect())
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// All pairwise edit distances between versions at `level`.
pub fn distance_matrix(history: &VersionHistory, level: Granularity) -> Result<DistanceMatrix> {
    history.require_versions(3)?;
    let n = history.len();
    let seqs: Vec<Vec<String>> = history
        .versions
        .iter()
        .map(|v| match level {
            Granularity::Character => v.text.chars().map(String::from).collect(),
            _ => segment(&v.text, level).tokens,
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let values: Vec<usize> = pairs
        .par_iter()
        .map(|&(i, j)| distance(&seqs[i], &seqs[j]))
        .collect();
    let mut entries = vec![0.0; n * n];
    for (&(i, j), d) in pairs.iter().zip(values) {
        entries[i * n + j] = d as f64;
        entries[j * n + i] = d as f64;
    }
    let dm = DistanceMatrix::new(n, entries)?;
    debug_assert!(satisfies_triangle_inequality(&dm));
    Ok(dm)
}

pub fn satisfies_triangle_inequality(dm: &DistanceMatrix) -> bool {
    let n = dm.n;
    (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| dm.get(i, k) <= dm.get(i, j) + dm.get(j, k))))
}

/// Share of positive classical-MDS eigenvalue mass carried by the top `k`.
pub fn mds_variance_check(dm: &DistanceMatrix, k: usize) -> Result<f64> {
    let n = dm.n;
    if n < k + 1 {
        return Err(Error::TooFew {
            what: "points",
            required: k + 1,
            got: n,
        });
    }
    let sq = DMatrix::from_fn(n, n, |i, j| dm.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    let mut eig: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    // Rounding noise sits around 1e-15 of the largest eigenvalue.
    let tol = eig.first().map_or(0.0, |top| top.abs() * 1e-12);
    let positive: Vec<f64> = eig.into_iter().filter(|e| *e > tol).collect();
    let total: f64 = positive.iter().sum();
    if positive.is_empty() {
        return Err(Error::NoPositiveEigenvalues);
    }
    Ok(positive.iter().take(k).sum::<f64>() / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneParams {
    pub dims: usize,
    /// `None` picks `min(30, (n - 1) / 3)`.
    pub perplexity: Option<f64>,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        TsneParams {
            dims: 3,
            perplexity: None,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEmbedding {
    pub coords: Vec<Vec<f64>>,
    pub seed: u64,
    /// Kullback–Leibler divergence at the last iteration.
    pub kl_final: f64,
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
}

/// Conditional Gaussian affinities for one row, calibrated by bisection on
/// the precision so that the row entropy equals `ln(perplexity)`.
fn calibrate_row(sq: &[f64], i: usize, target_entropy: f64) -> Vec<f64> {
    let n = sq.len();
    let min_sq = (0..n)
        .filter(|&j| j != i)
        .map(|j| sq[j])
        .fold(f64::INFINITY, f64::min);
    let mut beta = 1.0;
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let mut p = vec![0.0; n];
    for _ in 0..200 {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for j in 0..n {
            if j == i {
                p[j] = 0.0;
                continue;
            }
            let shifted = sq[j] - min_sq;
            let v = (-beta * shifted).exp();
            p[j] = v;
            sum += v;
            weighted += shifted * v;
        }
        let entropy = sum.ln() + beta * weighted / sum;
        for v in p.iter_mut() {
            *v /= sum;
        }
        let gap = entropy - target_entropy;
        if gap.abs() < 1e-10 {
            break;
        }
        if gap > 0.0 {
            lo = beta;
            beta = if hi.is_finite() {
                (beta + hi) / 2.0
            } else {
                beta * 2.0
            };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    p
}

/// Exact t-SNE on a precomputed distance matrix.
///
/// Affinities use squared distances in the Gaussian kernel. Optimisation is
/// plain gradient descent with momentum and per-coordinate gains, early
/// exaggeration, and recentring after every step. All arithmetic is
/// sequential, so the output depends only on the inputs and the seed.
pub fn tsne_embed(dm: &DistanceMatrix, params: &TsneParams) -> Result<TrajectoryEmbedding> {
    let n = dm.n;
    if n < 4 {
        return Err(Error::TooFew {
            what: "versions",
            required: 4,
            got: n,
        });
    }
    if dm.entries.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFiniteDistance);
    }
    let max_perplexity = (n - 1) as f64 / 3.0;
    let perplexity = params.perplexity.unwrap_or(max_perplexity.min(30.0));
    if !(perplexity > 0.0 && perplexity <= max_perplexity) {
        return Err(Error::InfeasiblePerplexity {
            perplexity,
            n,
            max: max_perplexity,
        });
    }
    if params.dims == 0 {
        return Err(Error::InvalidParameter(
            "embedding needs at least one dimension".into(),
        ));
    }
    let dims = params.dims;

    let target = perplexity.ln();
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        let sq: Vec<f64> = (0..n).map(|j| dm.get(i, j).powi(2)).collect();
        let row = calibrate_row(&sq, i, target);
        p[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    let mut joint = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                joint[i * n + j] = ((p[i * n + j] + p[j * n + i]) / (2.0 * n as f64)).max(1e-12);
            }
        }
    }

    let mut rng = seeded_rng(params.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<f64> = (0..n * dims).map(|_| normal.sample(&mut rng)).collect();
    let mut update = vec![0.0; n * dims];
    let mut gains = vec![1.0f64; n * dims];
    let mut grad = vec![0.0; n * dims];
    let mut num = vec![0.0; n * n];

    for iter in 0..params.iterations {
        let exaggeration = if iter < params.exaggeration_iterations {
            params.early_exaggeration
        } else {
            1.0
        };
        let momentum = if iter < 250 { 0.5 } else { 0.8 };
        let z = student_kernel(&y, n, dims, &mut num);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = num[i * n + j];
                let mult = 4.0 * (exaggeration * joint[i * n + j] - w / z) * w;
                for d in 0..dims {
                    grad[i * dims + d] += mult * (y[i * dims + d] - y[j * dims + d]);
                }
            }
        }
        for k in 0..n * dims {
            gains[k] = if (grad[k] > 0.0) != (update[k] > 0.0) {
                gains[k] + 0.2
            } else {
                (gains[k] * 0.8).max(0.01)
            };
            update[k] = momentum * update[k] - params.learning_rate * gains[k] * grad[k];
            y[k] += update[k];
        }
        for d in 0..dims {
            let centre = (0..n).map(|i| y[i * dims + d]).sum::<f64>() / n as f64;
            (0..n).for_each(|i| y[i * dims + d] -= centre);
        }
    }

    let z = student_kernel(&y, n, dims, &mut num);
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let pij = joint[i * n + j];
                let qij = (num[i * n + j] / z).max(1e-300);
                kl += pij * (pij / qij).ln();
            }
        }
    }
    Ok(TrajectoryEmbedding {
        coords: y.chunks(dims).map(<[f64]>::to_vec).collect(),
        seed: params.seed,
        kl_final: kl,
        perplexity,
        iterations: params.iterations,
        learning_rate: params.learning_rate,
    })
}

/// Fills `num` with `1 / (1 + |y_i - y_j|^2)` and returns its off-diagonal sum.
fn student_kernel(y: &[f64], n: usize, dims: usize, num: &mut [f64]) -> f64 {
    let mut z = 0.0;
    for i in 0..n {
        num[i * n + i] = 0.0;
        for j in 0..i {
            let d2: f64 = (0..dims)
                .map(|d| (y[i * dims + d] - y[j * dims + d]).powi(2))
                .sum();
            let w = 1.0 / (1.0 + d2);
            num[i * n + j] = w;
            num[j * n + i] = w;
            z += 2.0 * w;
        }
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleMethod {
    LocalMetric,
    Embedded,
}

impl fmt::Display for AngleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AngleMethod::LocalMetric => "local-metric",
            AngleMethod::Embedded => "embedded",
        })
    }
}

impl FromStr for AngleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "local" | "local-metric" => Ok(AngleMethod::LocalMetric),
            "tsne" | "embedded" => Ok(AngleMethod::Embedded),
            other => Err(Error::InvalidParameter(format!(
                "unknown angle method {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepLabel {
    Flow,
    Exploration,
    Degenerate,
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepLabel::Flow => "flow",
            StepLabel::Exploration => "exploration",
            StepLabel::Degenerate => "degenerate",
        })
    }
}

/// Angles at the interior versions `1..n-1`, in degrees. `None` marks a
/// degenerate triangle with a zero-length leg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSeries {
    pub betas: Vec<Option<f64>>,
    pub method: AngleMethod,
    pub labels: Vec<StepLabel>,
    pub band_deg: f64,
    /// Flow share among classified steps; `None` when all are degenerate.
    pub twist_ratio: Option<f64>,
    pub exploration_fraction: Option<f64>,
}

impl AngleSeries {
    /// Builds and classifies a series with the default band.
    pub fn new(betas: Vec<Option<f64>>, method: AngleMethod) -> Self {
        let mut s = AngleSeries {
            betas,
            method,
            labels: Vec::new(),
            band_deg: DEFAULT_FLOW_BAND_DEG,
            twist_ratio: None,
            exploration_fraction: None,
        };
        s.classify(DEFAULT_FLOW_BAND_DEG);
        s
    }

    /// `180° - β` per step.
    pub fn deviations(&self) -> Vec<Option<f64>> {
        self.betas.iter().map(|b| b.map(|b| 180.0 - b)).collect()
    }

    fn classify(&mut self, band: f64) {
        self.band_deg = band;
        self.labels = self
            .betas
            .iter()
            .map(|b| match b {
                None => StepLabel::Degenerate,
                Some(b) => {
                    let delta = 180.0 - b;
                    if delta >= band && delta <= 180.0 - band {
                        StepLabel::Exploration
                    } else {
                        StepLabel::Flow
                    }
                }
            })
            .collect();
        let flow = self
            .labels
            .iter()
            .filter(|l| **l == StepLabel::Flow)
            .count();
        let explore = self
            .labels
            .iter()
            .filter(|l| **l == StepLabel::Exploration)
            .count();
        let counted = flow + explore;
        if counted == 0 {
            self.twist_ratio = None;
            self.exploration_fraction = None;
        } else {
            self.twist_ratio = Some(flow as f64 / counted as f64);
            self.exploration_fraction = Some(explore as f64 / counted as f64);
        }
    }
}

fn angle_deg(cos: f64) -> f64 {
    cos.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Law-of-cosines angle at each interior version.
pub fn local_angles(dm: &DistanceMatrix) -> Result<AngleSeries> {
    if dm.n < 3 {
        return Err(Error::TooFew {
            what: "versions",
            required: 3,
            got: dm.n,
        });
    }
    let betas = (1..dm.n - 1)
        .map(|b| {
            let ab = dm.get(b - 1, b);
            let bc = dm.get(b, b + 1);
            let ac = dm.get(b - 1, b + 1);
            (ab > 0.0 && bc > 0.0)
                .then(|| angle_deg((ab * ab + bc * bc - ac * ac) / (2.0 * ab * bc)))
        })
        .collect();
    Ok(AngleSeries::new(betas, AngleMethod::LocalMetric))
}

/// Angle between `A - B` and `C - B` in the embedding.
pub fn embedded_angles(emb: &TrajectoryEmbedding) -> Result<AngleSeries> {
    let n = emb.coords.len();
    if n < 3 {
        return Err(Error::TooFew {
            what: "versions",
            required: 3,
            got: n,
        });
    }
    let betas = (1..n - 1)
        .map(|b| {
            let (a, mid, c) = (&emb.coords[b - 1], &emb.coords[b], &emb.coords[b + 1]);
            let u: Vec<f64> = a.iter().zip(mid).map(|(x, y)| x - y).collect();
            let v: Vec<f64> = c.iter().zip(mid).map(|(x, y)| x - y).collect();
            let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (nu > 0.0 && nv > 0.0).then(|| {
                let dot: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
                angle_deg(dot / (nu * nv))
            })
        })
        .collect();
    Ok(AngleSeries::new(betas, AngleMethod::Embedded))
}

/// Relabels with deviation band `band_deg`: a step explores when
/// `band <= 180° - β <= 180° - band`.
pub fn classify_and_twist(series: &AngleSeries, band_deg: f64) -> Result<AngleSeries> {
    if !(0.0..=90.0).contains(&band_deg) {
        return Err(Error::InvalidParameter(format!(
            "flow band {band_deg} outside [0, 90]"
        )));
    }
    let mut out = series.clone();
    out.classify(band_deg);
    if out.twist_ratio.is_none() {
        return Err(Error::AllDegenerate);
    }
    Ok(out)
}

/// Summed character distance between consecutive versions.
pub fn total_edits(history: &VersionHistory) -> usize {
    let chars: Vec<Vec<char>> = history
        .versions
        .iter()
        .map(|v| v.text.chars().collect())
        .collect();
    chars.par_windows(2).map(|w| distance(&w[0], &w[1])).sum()
}

pub fn twist_vs_edits(twist_ratios: &[f64], edits: &[f64]) -> Result<Correlation> {
    pearson(twist_ratios, edits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle(ab: f64, bc: f64, ac: f64) -> DistanceMatrix {
        DistanceMatrix::new(3, vec![0.0, ab, ac, ab, 0.0, bc, ac, bc, 0.0]).unwrap()
    }

    fn beta(dm: &DistanceMatrix) -> f64 {
        local_angles(dm).unwrap().betas[0].unwrap()
    }

    #[test]
    fn matrix_of_appends() {
        let h = VersionHistory::from_texts("t", ["a", "ab", "abc"]);
        let dm = distance_matrix(&h, Granularity::Character).unwrap();
        assert_eq!(
            dm.entries,
            vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]
        );
        assert!(distance_matrix(
            &VersionHistory::from_texts("t", ["a", "b"]),
            Granularity::Character
        )
        .is_err());
    }

    #[test]
    fn angle_fixtures() {
        assert_eq!(beta(&triangle(2.0, 3.0, 5.0)), 180.0);
        assert!((beta(&triangle(1.0, 1.0, 2f64.sqrt())) - 90.0).abs() < 1e-9);
        assert!((beta(&triangle(1.0, 1.0, 1.0)) - 60.0).abs() < 1e-9);
        let degenerate = local_angles(&triangle(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(degenerate.labels, vec![StepLabel::Degenerate]);
        assert!(matches!(
            classify_and_twist(&degenerate, 30.0),
            Err(Error::AllDegenerate)
        ));
    }

    #[test]
    fn band_rule() {
        let s = AngleSeries::new(
            [180.0, 175.0, 100.0, 180.0].into_iter().map(Some).collect(),
            AngleMethod::LocalMetric,
        );
        let s = classify_and_twist(&s, 30.0).unwrap();
        use StepLabel::*;
        assert_eq!(s.labels, vec![Flow, Flow, Exploration, Flow]);
        assert_eq!(s.twist_ratio, Some(0.75));
        assert_eq!(s.exploration_fraction, Some(0.25));

        let all = |b: f64| AngleSeries::new(vec![Some(b); 5], AngleMethod::LocalMetric);
        assert_eq!(all(180.0).twist_ratio, Some(1.0));
        assert_eq!(all(90.0).twist_ratio, Some(0.0));
    }

    #[test]
    fn mds_on_a_line() {
        let pts: Vec<Vec<f64>> = [0.0, 1.0, 3.0, 4.5, 9.0].iter().map(|x| vec![*x]).collect();
        let dm = DistanceMatrix::from_points(&pts).unwrap();
        assert!((mds_variance_check(&dm, 1).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mds_rejects_coincident_points() {
        let dm = DistanceMatrix::new(3, vec![0.0; 9]).unwrap();
        assert!(matches!(
            mds_variance_check(&dm, 1),
            Err(Error::NoPositiveEigenvalues)
        ));
        let two = DistanceMatrix::new(2, vec![0.0; 4]).unwrap();
        assert!(mds_variance_check(&two, 3).is_err());
    }

    #[test]
    fn tsne_keeps_equidistant_points_balanced() {
        let n = 4;
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { 0.0 } else { 1.0 })
            .collect();
        let dm = DistanceMatrix::new(n, entries).unwrap();
        for seed in 0..10 {
            let emb = tsne_embed(
                &dm,
                &TsneParams {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            let ed = DistanceMatrix::from_points(&emb.coords).unwrap();
            let off: Vec<f64> = (0..n)
                .flat_map(|i| (0..i).map(move |j| (i, j)))
                .map(|(i, j)| ed.get(i, j))
                .collect();
            let (lo, hi) = off
                .iter()
                .fold((f64::MAX, 0.0f64), |(l, h), d| (l.min(*d), h.max(*d)));
            assert!(hi <= lo * 1.2, "seed {seed}: {off:?}");
        }
    }

    #[test]
    fn tsne_keeps_duplicates_together() {
        let pts: Vec<Vec<f64>> = vec![
            vec![0.0],
            vec![0.0],
            vec![5.0],
            vec![9.0],
            vec![14.0],
            vec![20.0],
            vec![27.0],
        ];
        let dm = DistanceMatrix::from_points(&pts).unwrap();
        let emb = tsne_embed(
            &dm,
            &TsneParams {
                seed: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let ed = DistanceMatrix::from_points(&emb.coords).unwrap();
        for k in 2..pts.len() {
            assert!(ed.get(0, 1) < ed.get(0, k) && ed.get(0, 1) < ed.get(1, k));
        }
    }

    #[test]
    fn tsne_rejects_bad_input() {
        let dm =
            DistanceMatrix::from_points(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let too_high = TsneParams {
            perplexity: Some(5.0),
            ..Default::default()
        };
        assert!(matches!(
            tsne_embed(&dm, &too_high),
            Err(Error::InfeasiblePerplexity { .. })
        ));
        let small = DistanceMatrix::from_points(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert!(tsne_embed(&small, &TsneParams::default()).is_err());
        let bad = DistanceMatrix {
            n: 4,
            entries: vec![f64::NAN; 16],
        };
        assert!(matches!(
            tsne_embed(&bad, &TsneParams::default()),
            Err(Error::NonFiniteDistance)
        ));
    }

    #[test]
    fn twist_correlation_needs_spread() {
        assert!(matches!(
            twist_vs_edits(&[0.5, 0.5, 0.5], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroVariance)
        ));
        assert!(matches!(
            twist_vs_edits(&[0.1, 0.5], &[1.0, 2.0]),
            Err(Error::TooFew { .. })
        ));
    }

    proptest! {
        #[test]
        fn local_angles_in_range(texts in prop::collection::vec("[abc]{1,10}", 3..8)) {
            let h = crate::corpus::dedup_consecutive(VersionHistory::from_texts("p", &texts));
            prop_assume!(h.len() >= 3);
            let dm = distance_matrix(&h, Granularity::Character).unwrap();
            prop_assert!(satisfies_triangle_inequality(&dm));
            let s = local_angles(&dm).unwrap();
            for b in s.betas.iter().flatten() {
                prop_assert!(*b >= 0.0 && *b <= 180.0);
            }
            let scaled = local_angles(&dm.scaled(7.0).unwrap()).unwrap();
            prop_assert_eq!(s.labels, scaled.labels);
        }
    }
}
