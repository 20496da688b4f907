//! Corpus-level files under `out/aggregate/`, built only from the per-author
//! `summary.json` files and the run manifest.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use drafttrace::cloud::mean_edit_profile;
use drafttrace::exploration::{exploration_vs_versions, mean_exploration_curve};
use drafttrace::stats::{bootstrap_ci_curves, derive_seed, pearson};
use drafttrace::trajectory::twist_vs_edits;
use drafttrace::{Correlation, GriddedCurve, StepLabel};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analyze::{author_dir, AuthorSummary};
use crate::config::{Provenance, RunManifest};
use crate::output::{histogram, write_json, Csv};

const GRID_POINTS: usize = 101;
const CI_LEVEL: f64 = 0.995;
const SW_BINS: usize = 20;
const E_BINS: usize = 20;
const TWIST_BINS: usize = 10;
const DEVIATION_BIN_DEG: f64 = 10.0;

/// Files every successful aggregation writes.
pub const AGGREGATE_FILES: [&str; 7] = [
    "complexity_histogram.csv",
    "exploration_mean.csv",
    "exploration_histogram.csv",
    "exploration_vs_versions.json",
    "angle_deviation.csv",
    "twist_histogram.csv",
    "twist_vs_edits.json",
];

#[derive(Debug, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub authors: usize,
    pub files: Vec<String>,
    pub notices: Vec<String>,
    pub mean_coefficient_e: Option<f64>,
    pub exploration_share_mean_of_authors: Option<f64>,
    pub exploration_share_pooled: Option<f64>,
}

pub struct AggregateOutcome {
    pub partial: bool,
}

fn read_manifest(out: &Path) -> Result<RunManifest> {
    let path = out.join("run.json");
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading {}; run analyze first", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_summary(out: &Path, author: &str) -> Result<AuthorSummary> {
    let path = author_dir(out, author).join("summary.json");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn correlation_doc(c: &Result<Correlation, drafttrace::Error>) -> Value {
    match c {
        Ok(c) => serde_json::json!({ "r": c.r, "p": c.p, "n": c.n }),
        Err(e) => serde_json::json!({ "error": e.to_string() }),
    }
}

pub fn run(out: &Path) -> Result<AggregateOutcome> {
    let manifest = read_manifest(out)?;
    let cfg = &manifest.config;
    let prov = cfg.provenance();
    let summaries: Vec<AuthorSummary> = manifest
        .authors
        .iter()
        .map(|a| read_summary(out, a))
        .collect::<Result<_>>()?;
    if summaries.is_empty() {
        bail!("no per-author reports under {}", out.display());
    }
    let dir = out.join("aggregate");
    let mut notices = Vec::new();
    let mut files = Vec::new();
    let seed = |op: &str| derive_seed(cfg.seed, op, "aggregate");

    // Complexity: observed index histogram against the pooled null.
    let observed: Vec<(&str, f64)> = summaries
        .iter()
        .filter_map(|s| {
            s.complexity
                .as_ref()
                .map(|c| (s.author_id.as_str(), c.sw_index))
        })
        .collect();
    let null: Vec<f64> = summaries
        .iter()
        .filter_map(|s| s.complexity.as_ref())
        .flat_map(|c| c.null_distribution.iter().copied())
        .collect();
    let mut by_author = Csv::new(&prov, &["author_id", "sw_index", "null_rank"]);
    for s in &summaries {
        if let Some(c) = &s.complexity {
            by_author.row(&[
                s.author_id.clone(),
                c.sw_index.to_string(),
                c.null_rank().to_string(),
            ]);
        }
    }
    by_author.write(&dir.join("complexity_by_author.csv"))?;

    let enough = |what: &str, have: usize, need: usize, notices: &mut Vec<String>| {
        if have < need {
            notices.push(format!(
                "{what} skipped: {have} usable authors, {need} required"
            ));
            false
        } else {
            true
        }
    };

    if enough("complexity histogram", observed.len(), 2, &mut notices) {
        let obs: Vec<f64> = observed.iter().map(|(_, v)| *v).collect();
        let h_obs = histogram(&obs, 0.0, 1.0, SW_BINS);
        let h_null = histogram(&null, 0.0, 1.0, SW_BINS);
        let mut csv = Csv::new(
            &prov,
            &[
                "bin_low",
                "bin_high",
                "observed_count",
                "observed_fraction",
                "null_fraction",
            ],
        );
        for ((lo, hi, c), (_, _, n)) in h_obs.iter().zip(&h_null) {
            csv.row(&[
                lo.to_string(),
                hi.to_string(),
                c.to_string(),
                (*c as f64 / obs.len() as f64).to_string(),
                (*n as f64 / null.len().max(1) as f64).to_string(),
            ]);
        }
        csv.write(&dir.join("complexity_histogram.csv"))?;
        files.push("complexity_histogram.csv".to_string());
    }

    // Edit profile across authors.
    let profiles: Vec<Vec<(f64, f64)>> = summaries
        .iter()
        .filter_map(|s| s.edit_profile.clone())
        .collect();
    if enough("edit profile", profiles.len(), 2, &mut notices) {
        let curve = mean_edit_profile(
            &profiles,
            GRID_POINTS,
            cfg.n_boot,
            CI_LEVEL,
            seed("edit-profile"),
        )?;
        write_curve(
            &dir.join("edit_profile.csv"),
            &prov,
            "relative_position",
            "mean_edits",
            &curve,
        )?;
        files.push("edit_profile.csv".to_string());
    }

    // Exploration.
    let curves: Vec<_> = summaries
        .iter()
        .filter_map(|s| s.exploration.clone())
        .collect();
    let mut by_author = Csv::new(&prov, &["author_id", "E", "t_f"]);
    for c in &curves {
        by_author.row(&[
            c.author_id.clone(),
            c.coefficient_e.to_string(),
            c.n_versions().to_string(),
        ]);
    }
    by_author.write(&dir.join("exploration_by_author.csv"))?;
    let mean_e = (!curves.is_empty())
        .then(|| curves.iter().map(|c| c.coefficient_e).sum::<f64>() / curves.len() as f64);
    if enough("exploration curve", curves.len(), 2, &mut notices) {
        let curve = mean_exploration_curve(
            &curves,
            GRID_POINTS,
            cfg.n_boot,
            CI_LEVEL,
            seed("exploration"),
        )?;
        write_curve(
            &dir.join("exploration_mean.csv"),
            &prov,
            "u",
            "mean_h",
            &curve,
        )?;
        files.push("exploration_mean.csv".to_string());

        let es: Vec<f64> = curves.iter().map(|c| c.coefficient_e).collect();
        let top = es.iter().copied().fold(0.0, f64::max);
        let hi = if top > 0.0 { top } else { 1.0 };
        let mut csv = Csv::new(&prov, &["bin_low", "bin_high", "count"]);
        for (lo, hi, c) in histogram(&es, 0.0, hi, E_BINS) {
            csv.row(&[lo.to_string(), hi.to_string(), c.to_string()]);
        }
        csv.write(&dir.join("exploration_histogram.csv"))?;
        files.push("exploration_histogram.csv".to_string());
    }
    if enough("exploration vs versions", curves.len(), 3, &mut notices) {
        let corr = exploration_vs_versions(&curves);
        if let Err(e) = &corr {
            notices.push(format!("exploration vs versions: {e}"));
        }
        let points: Vec<Value> = curves
            .iter()
            .map(|c| serde_json::json!({ "author_id": c.author_id, "E": c.coefficient_e, "t_f": c.n_versions() }))
            .collect();
        let body = serde_json::json!({ "correlation": correlation_doc(&corr), "points": points });
        write_json(&dir.join("exploration_vs_versions.json"), &prov, &body)?;
        files.push("exploration_vs_versions.json".to_string());
    }

    // Angles: per-author deviation distributions with a bootstrap band, plus
    // the pooled distribution over every classified step.
    let angled: Vec<&AuthorSummary> = summaries.iter().filter(|s| s.angles.is_some()).collect();
    let n_bins = (180.0 / DEVIATION_BIN_DEG) as usize;
    let per_author: Vec<Vec<f64>> = angled
        .iter()
        .filter_map(|s| {
            let devs: Vec<f64> = s
                .angles
                .as_ref()?
                .deviations()
                .into_iter()
                .flatten()
                .collect();
            (!devs.is_empty()).then(|| {
                histogram(&devs, 0.0, 180.0, n_bins)
                    .into_iter()
                    .map(|(_, _, c)| c as f64 / devs.len() as f64)
                    .collect()
            })
        })
        .collect();
    let pooled_devs: Vec<f64> = angled
        .iter()
        .flat_map(|s| {
            s.angles
                .as_ref()
                .unwrap()
                .deviations()
                .into_iter()
                .flatten()
        })
        .collect();
    let mut share_mean = None;
    let mut share_pooled = None;
    if enough("angle deviation", per_author.len(), 2, &mut notices) {
        let band = bootstrap_ci_curves(&per_author, CI_LEVEL, cfg.n_boot, seed("angles"))?;
        let pooled = histogram(&pooled_devs, 0.0, 180.0, n_bins);
        let mut csv = Csv::new(
            &prov,
            &[
                "delta_low",
                "delta_high",
                "mean_fraction",
                "ci_low",
                "ci_high",
                "pooled_fraction",
            ],
        );
        for (k, ((lo, hi, c), ci)) in pooled.iter().zip(&band).enumerate() {
            let mean = per_author.iter().map(|h| h[k]).sum::<f64>() / per_author.len() as f64;
            csv.row(&[
                lo.to_string(),
                hi.to_string(),
                mean.to_string(),
                ci.low.to_string(),
                ci.high.to_string(),
                (*c as f64 / pooled_devs.len() as f64).to_string(),
            ]);
        }
        csv.write(&dir.join("angle_deviation.csv"))?;
        files.push("angle_deviation.csv".to_string());
    }
    let fractions: Vec<f64> = angled
        .iter()
        .filter_map(|s| s.angles.as_ref().unwrap().exploration_fraction)
        .collect();
    if !fractions.is_empty() {
        share_mean = Some(fractions.iter().sum::<f64>() / fractions.len() as f64);
        let labels = angled
            .iter()
            .flat_map(|s| s.angles.as_ref().unwrap().labels.iter());
        let (mut explore, mut counted) = (0usize, 0usize);
        for l in labels {
            match l {
                StepLabel::Exploration => {
                    explore += 1;
                    counted += 1;
                }
                StepLabel::Flow => counted += 1,
                StepLabel::Degenerate => {}
            }
        }
        share_pooled = (counted > 0).then(|| explore as f64 / counted as f64);
    }

    let twisted: Vec<(&AuthorSummary, f64)> = angled
        .iter()
        .filter_map(|s| s.angles.as_ref().unwrap().twist_ratio.map(|t| (*s, t)))
        .collect();
    if enough("twist histogram", twisted.len(), 2, &mut notices) {
        let ts: Vec<f64> = twisted.iter().map(|(_, t)| *t).collect();
        let mut csv = Csv::new(&prov, &["bin_low", "bin_high", "count"]);
        for (lo, hi, c) in histogram(&ts, 0.0, 1.0, TWIST_BINS) {
            csv.row(&[lo.to_string(), hi.to_string(), c.to_string()]);
        }
        csv.write(&dir.join("twist_histogram.csv"))?;
        files.push("twist_histogram.csv".to_string());
    }
    if enough("twist vs edits", twisted.len(), 3, &mut notices) {
        let ts: Vec<f64> = twisted.iter().map(|(_, t)| *t).collect();
        let edits: Vec<f64> = twisted
            .iter()
            .map(|(s, _)| s.total_char_edits as f64)
            .collect();
        let versions: Vec<f64> = twisted.iter().map(|(s, _)| s.n_versions as f64).collect();
        let by_edits = twist_vs_edits(&ts, &edits);
        let by_versions = pearson(&ts, &versions);
        if let Err(e) = &by_edits {
            notices.push(format!("twist vs edits: {e}"));
        }
        let points: Vec<Value> = twisted
            .iter()
            .map(|(s, t)| {
                let a = s.angles.as_ref().unwrap();
                serde_json::json!({
                    "author_id": s.author_id,
                    "twist_ratio": t,
                    "exploration_fraction": a.exploration_fraction,
                    "total_char_edits": s.total_char_edits,
                    "n_versions": s.n_versions,
                })
            })
            .collect();
        let body = serde_json::json!({
            "method": cfg.angle_method,
            "band_deg": cfg.flow_band_deg,
            "correlation_vs_char_edits": correlation_doc(&by_edits),
            "correlation_vs_versions": correlation_doc(&by_versions),
            "points": points,
        });
        write_json(&dir.join("twist_vs_edits.json"), &prov, &body)?;
        files.push("twist_vs_edits.json".to_string());
    }

    let partial = !notices.is_empty()
        || AGGREGATE_FILES
            .iter()
            .any(|f| !files.iter().any(|g| g == f));
    for n in &notices {
        log::warn!("{n}");
    }
    let summary = AggregateSummary {
        authors: summaries.len(),
        files,
        notices,
        mean_coefficient_e: mean_e,
        exploration_share_mean_of_authors: share_mean,
        exploration_share_pooled: share_pooled,
    };
    write_json(&dir.join("summary.json"), &prov, &summary)?;
    Ok(AggregateOutcome { partial })
}

fn write_curve(
    path: &Path,
    prov: &Provenance,
    x: &str,
    y: &str,
    curve: &GriddedCurve,
) -> Result<()> {
    let mut csv = Csv::new(prov, &[x, y, "ci_low", "ci_high"]);
    for k in 0..curve.u.len() {
        csv.row(&[
            curve.u[k].to_string(),
            curve.mean[k].to_string(),
            curve.ci_low[k].to_string(),
            curve.ci_high[k].to_string(),
        ]);
    }
    csv.write(path)
}
