//! Statistical kernel shared by every measure: entropy, percentile
//! bootstrap, Pearson correlation and seed derivation.
//!
//! All randomness is explicit. A run has one root seed; each stochastic
//! operation derives its own child seed from `(root, operation, key)` with
//! [`derive_seed`], so results never depend on execution order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Seeded generator used everywhere in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stable child seed for `(root, operation, key)`.
///
/// Uses SHA-256 so the mapping is identical across platforms and compiler
/// versions.
pub fn derive_seed(root: u64, operation: &str, key: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update((operation.len() as u64).to_le_bytes());
    hasher.update(operation.as_bytes());
    hasher.update(key.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty vector".into()));
    }
    if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidDistribution(format!("entry {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    Ok(0.0
        - p.iter()
            .filter(|v| **v > 0.0)
            .map(|v| v * v.ln())
            .sum::<f64>())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub level: f64,
    pub low: f64,
    pub high: f64,
    pub n_boot: usize,
    pub seed: u64,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Inverse-CDF quantile of a sorted sample; always returns an element of it.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = (q * n as f64).ceil() as usize;
    sorted[rank.saturating_sub(1).min(n - 1)]
}

fn check_bootstrap_args(n: usize, level: f64, n_boot: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFew {
            what: "samples",
            required: 2,
            got: n,
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence level {level}")));
    }
    if n_boot == 0 {
        return Err(Error::InvalidParameter("n_boot must be positive".into()));
    }
    Ok(())
}

fn percentile_interval(
    mut stats: Vec<f64>,
    level: f64,
    n_boot: usize,
    seed: u64,
) -> ConfidenceInterval {
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    ConfidenceInterval {
        level,
        low: quantile_sorted(&stats, tail),
        high: quantile_sorted(&stats, 1.0 - tail),
        n_boot,
        seed,
    }
}

/// Percentile bootstrap interval for the mean of `samples`.
pub fn bootstrap_ci(
    samples: &[f64],
    level: f64,
    n_boot: usize,
    seed: u64,
) -> Result<ConfidenceInterval> {
    check_bootstrap_args(samples.len(), level, n_boot)?;
    let n = samples.len();
    let mut rng = seeded_rng(seed);
    let stats = (0..n_boot)
        .map(|_| (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    Ok(percentile_interval(stats, level, n_boot, seed))
}

/// Pointwise percentile bootstrap for the mean of equally long curves.
///
/// Whole curves are resampled, so every grid point of one replicate uses the
/// same resampled set of curves.
pub fn bootstrap_ci_curves(
    curves: &[Vec<f64>],
    level: f64,
    n_boot: usize,
    seed: u64,
) -> Result<Vec<ConfidenceInterval>> {
    check_bootstrap_args(curves.len(), level, n_boot)?;
    let width = curves[0].len();
    if let Some(c) = curves.iter().find(|c| c.len() != width) {
        return Err(Error::LengthMismatch(width, c.len()));
    }
    let n = curves.len();
    let mut rng = seeded_rng(seed);
    // replicate-major: per_point[k][b]
    let mut per_point = vec![Vec::with_capacity(n_boot); width];
    let mut acc = vec![0.0; width];
    for _ in 0..n_boot {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for _ in 0..n {
            let c = &curves[rng.random_range(0..n)];
            for (a, v) in acc.iter_mut().zip(c) {
                *a += v;
            }
        }
        for (k, a) in acc.iter().enumerate() {
            per_point[k].push(a / n as f64);
        }
    }
    Ok(per_point
        .into_iter()
        .map(|stats| percentile_interval(stats, level, n_boot, seed))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Pearson product-moment correlation with a two-sided Student-t p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFew {
            what: "paired observations",
            required: 3,
            got: n,
        });
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if 1.0 - r * r <= 0.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
        (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
    };
    Ok(Correlation { r, p, n })
}

/// A curve sampled on a uniform grid over `[0, 1]` with a pointwise band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GriddedCurve {
    pub u: Vec<f64>,
    pub mean: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub level: f64,
    pub n_boot: usize,
    pub seed: u64,
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| k as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Piecewise-linear interpolation of `(xs, ys)` at each grid position.
/// `xs` must be non-decreasing; values outside the range clamp to the ends.
pub fn interpolate(xs: &[f64], ys: &[f64], grid: &[f64]) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    grid.iter()
        .map(|&u| {
            if u <= xs[0] {
                return ys[0];
            }
            let last = xs.len() - 1;
            if u >= xs[last] {
                return ys[last];
            }
            let k = xs.partition_point(|&x| x <= u);
            let (x0, x1) = (xs[k - 1], xs[k]);
            let (y0, y1) = (ys[k - 1], ys[k]);
            if x1 == x0 {
                y1
            } else {
                y0 + (y1 - y0) * (u - x0) / (x1 - x0)
            }
        })
        .collect()
}

/// Mean of several `(x, y)` profiles on a common grid, with a pointwise
/// bootstrap band obtained by resampling whole profiles.
pub fn mean_curve_with_band(
    profiles: &[(Vec<f64>, Vec<f64>)],
    grid_points: usize,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<GriddedCurve> {
    if profiles.len() < 2 {
        return Err(Error::TooFew {
            what: "curves",
            required: 2,
            got: profiles.len(),
        });
    }
    if grid_points < 2 {
        return Err(Error::InvalidParameter(
            "grid needs at least 2 points".into(),
        ));
    }
    let u = uniform_grid(grid_points);
    let gridded: Vec<Vec<f64>> = profiles
        .iter()
        .map(|(x, y)| interpolate(x, y, &u))
        .collect();
    let mean: Vec<f64> = (0..grid_points)
        .map(|k| gridded.iter().map(|c| c[k]).sum::<f64>() / gridded.len() as f64)
        .collect();
    let band = bootstrap_ci_curves(&gridded, level, n_boot, seed)?;
    Ok(GriddedCurve {
        u,
        mean,
        ci_low: band.iter().map(|ci| ci.low).collect(),
        ci_high: band.iter().map(|ci| ci.high).collect(),
        level,
        n_boot,
        seed,
    })
}
