//! Per-author pipeline: granularity, cloud, complexity, exploration and
//! trajectory, each written under `out/authors/<id>/`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use drafttrace::cloud::{build_cloud, cloud_plot_data, edit_profile};
use drafttrace::complexity::complexity_report;
use drafttrace::corpus::{filter_active, load_corpus};
use drafttrace::exploration::exploration_curve;
use drafttrace::granularity::select_granularity;
use drafttrace::stats::derive_seed;
use drafttrace::trajectory::{
    classify_and_twist, distance_matrix, embedded_angles, local_angles, mds_variance_check,
    total_edits, tsne_embed, TsneParams,
};
use drafttrace::{
    AngleMethod, AngleSeries, ComplexityReport, ExplorationCurve, Granularity, GranularityReport,
    TrajectoryEmbedding, VersionHistory,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Format, LevelChoice, Provenance, RunConfig, RunManifest};
use crate::output::{opt, write_json, Csv};

/// Everything aggregation needs about one author.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuthorSummary {
    pub author_id: String,
    pub ok: bool,
    /// Measure name to error message.
    pub errors: BTreeMap<String, String>,
    pub n_versions: usize,
    pub total_char_edits: usize,
    pub selected_granularity: Option<Granularity>,
    pub analysis_level: Granularity,
    pub complexity: Option<ComplexityReport>,
    pub edit_profile: Option<Vec<(f64, f64)>>,
    pub exploration: Option<ExplorationCurve>,
    pub angles: Option<AngleSeries>,
    pub mds_variance_3d: Option<f64>,
}

/// Directory name for an author id: anything outside `[A-Za-z0-9._-]`
/// becomes `_`.
pub fn author_dir(out: &Path, author_id: &str) -> PathBuf {
    let safe: String = author_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    out.join("authors").join(safe)
}

pub struct AnalyzeOutcome {
    pub manifest: RunManifest,
    pub partial: bool,
}

pub fn run(inputs: &[PathBuf], out: &Path, cfg: &RunConfig) -> Result<AnalyzeOutcome> {
    let corpus = filter_active(load_corpus(inputs)?, cfg.min_changes);
    for ex in &corpus.filter_log {
        log::info!("excluded {}: {}", ex.author_id, ex.reason);
    }
    if corpus.histories.is_empty() {
        bail!("no histories left to analyse after filtering");
    }
    let mut seen = std::collections::BTreeSet::new();
    for h in &corpus.histories {
        if !seen.insert(author_dir(out, &h.author_id)) {
            bail!(
                "two histories map to the same output directory: {}",
                h.author_id
            );
        }
    }
    let prov = cfg.provenance();
    let summaries: Vec<AuthorSummary> = corpus
        .histories
        .par_iter()
        .map(|h| {
            let s = analyze_author(h, cfg);
            write_author(out, &prov, cfg, h, &s).map(|_| s.summary)
        })
        .collect::<Result<_>>()?;

    let failed: Vec<String> = summaries
        .iter()
        .filter(|s| !s.ok)
        .map(|s| s.author_id.clone())
        .collect();
    for s in summaries.iter().filter(|s| !s.ok) {
        for (measure, err) in &s.errors {
            log::warn!("{}: {measure}: {err}", s.author_id);
        }
    }
    let manifest = RunManifest {
        provenance: prov.clone(),
        config: cfg.clone(),
        inputs: inputs.to_vec(),
        authors: summaries.iter().map(|s| s.author_id.clone()).collect(),
        excluded: corpus.filter_log.clone(),
        failed: failed.clone(),
    };
    write_json(&out.join("run.json"), &prov, &manifest)?;
    Ok(AnalyzeOutcome {
        manifest,
        partial: !failed.is_empty(),
    })
}

struct AuthorResult {
    summary: AuthorSummary,
    granularity: Option<GranularityReport>,
    cloud: Option<drafttrace::WritingCloud>,
    embedding: Option<TrajectoryEmbedding>,
}

fn analyze_author(h: &VersionHistory, cfg: &RunConfig) -> AuthorResult {
    let id = h.author_id.as_str();
    let seed = |op: &str| derive_seed(cfg.seed, op, id);
    let mut errors = BTreeMap::new();
    let mut note = |measure: &str, e: &dyn std::fmt::Display| {
        errors.insert(measure.to_string(), e.to_string());
    };

    let granularity = select_granularity(h, &Granularity::ALL, cfg.n_shuffles, seed("granularity"))
        .map_err(|e| note("granularity", &e))
        .ok();
    let analysis_level = match cfg.granularity {
        LevelChoice::Fixed(g) => g,
        LevelChoice::Auto => granularity
            .as_ref()
            .map_or(Granularity::Sentence, |r| r.selected),
    };

    let cloud = build_cloud(h, analysis_level)
        .map_err(|e| note("cloud", &e))
        .ok();
    let complexity = cloud.as_ref().and_then(|c| {
        complexity_report(c, cfg.n_perm, seed("complexity"))
            .map_err(|e| note("complexity", &e))
            .ok()
    });
    let exploration = exploration_curve(h)
        .map_err(|e| note("exploration", &e))
        .ok();

    let dm = distance_matrix(h, Granularity::Character)
        .map_err(|e| note("trajectory", &e))
        .ok();
    let mds_variance_3d = dm.as_ref().and_then(|d| mds_variance_check(d, 3).ok());
    let embedding = dm.as_ref().filter(|d| d.n >= 4).and_then(|d| {
        let params = TsneParams {
            seed: seed("tsne"),
            ..Default::default()
        };
        tsne_embed(d, &params)
            .map_err(|e| note("embedding", &e))
            .ok()
    });
    let angles = dm.as_ref().and_then(|d| {
        let series = match cfg.angle_method {
            AngleMethod::LocalMetric => local_angles(d).ok(),
            AngleMethod::Embedded => embedding.as_ref().and_then(|e| embedded_angles(e).ok()),
        }?;
        classify_and_twist(&series, cfg.flow_band_deg)
            .map_err(|e| note("angles", &e))
            .ok()
    });
    if cfg.angle_method == AngleMethod::Embedded && embedding.is_none() && dm.is_some() {
        note("angles", &"embedding unavailable for fewer than 4 versions");
    }

    AuthorResult {
        summary: AuthorSummary {
            author_id: id.to_string(),
            ok: errors.is_empty(),
            errors,
            n_versions: h.len(),
            total_char_edits: total_edits(h),
            selected_granularity: granularity.as_ref().map(|r| r.selected),
            analysis_level,
            edit_profile: cloud.as_ref().map(edit_profile),
            complexity,
            exploration,
            angles,
            mds_variance_3d,
        },
        granularity,
        cloud,
        embedding,
    }
}

fn write_author(
    out: &Path,
    prov: &Provenance,
    cfg: &RunConfig,
    h: &VersionHistory,
    r: &AuthorResult,
) -> Result<()> {
    let dir = author_dir(out, &h.author_id);
    let s = &r.summary;
    write_json(&dir.join("summary.json"), prov, s)?;

    if cfg.emits(Format::Json) {
        if let Some(g) = &r.granularity {
            write_json(&dir.join("granularity.json"), prov, g)?;
        }
        if let Some(c) = &s.complexity {
            write_json(&dir.join("complexity.json"), prov, c)?;
        }
        if let Some(a) = &s.angles {
            #[derive(Serialize)]
            struct TrajectorySummary {
                twist_ratio: Option<f64>,
                exploration_fraction: Option<f64>,
                method: AngleMethod,
                band_deg: f64,
                seed: u64,
                mds_variance_3d: Option<f64>,
                embedding: Option<EmbeddingMeta>,
            }
            #[derive(Serialize)]
            struct EmbeddingMeta {
                seed: u64,
                kl_final: f64,
                perplexity: f64,
                iterations: usize,
                learning_rate: f64,
            }
            let body = TrajectorySummary {
                twist_ratio: a.twist_ratio,
                exploration_fraction: a.exploration_fraction,
                method: a.method,
                band_deg: a.band_deg,
                seed: cfg.seed,
                mds_variance_3d: s.mds_variance_3d,
                embedding: r.embedding.as_ref().map(|e| EmbeddingMeta {
                    seed: e.seed,
                    kl_final: e.kl_final,
                    perplexity: e.perplexity,
                    iterations: e.iterations,
                    learning_rate: e.learning_rate,
                }),
            };
            write_json(&dir.join("trajectory.json"), prov, &body)?;
        }
    }

    if cfg.emits(Format::Csv) {
        if let Some(cloud) = &r.cloud {
            let plot = cloud_plot_data(cloud);
            let mut pts = Csv::new(prov, &["version", "column", "birth_version"]);
            for (v, line) in plot.polylines.iter().enumerate() {
                for p in line {
                    pts.row(&[
                        v.to_string(),
                        p.column.to_string(),
                        p.birth_version.to_string(),
                    ]);
                }
            }
            pts.write(&dir.join("cloud.csv"))?;
            let mut segs = Csv::new(
                prov,
                &[
                    "from_column",
                    "from_birth",
                    "to_column",
                    "to_birth",
                    "multiplicity",
                ],
            );
            for g in &plot.segments {
                segs.row(&[
                    g.from.column.to_string(),
                    g.from.birth_version.to_string(),
                    g.to.column.to_string(),
                    g.to.birth_version.to_string(),
                    g.multiplicity.to_string(),
                ]);
            }
            segs.write(&dir.join("cloud_segments.csv"))?;
            let mut prof = Csv::new(prov, &["column", "relative_position", "edits"]);
            for (c, (x, n)) in edit_profile(cloud).into_iter().enumerate() {
                prof.row(&[c.to_string(), x.to_string(), n.to_string()]);
            }
            prof.write(&dir.join("edit_profile.csv"))?;
        }
        if let Some(e) = &s.exploration {
            let mut csv = Csv::new(prov, &["t", "u", "h"]);
            for (t, (u, h)) in e.normalized_time().iter().zip(&e.h_values).enumerate() {
                csv.row(&[t.to_string(), u.to_string(), h.to_string()]);
            }
            csv.write(&dir.join("exploration.csv"))?;
        }
        if let Some(a) = &s.angles {
            let mut csv = Csv::new(prov, &["version", "beta_deg", "delta_deg", "label"]);
            for (k, ((b, d), l)) in a
                .betas
                .iter()
                .zip(a.deviations())
                .zip(&a.labels)
                .enumerate()
            {
                csv.row(&[(k + 1).to_string(), opt(*b), opt(d), l.to_string()]);
            }
            csv.write(&dir.join("trajectory.csv"))?;
        }
        if let Some(e) = &r.embedding {
            let mut header = vec!["version".to_string()];
            header.extend(
                ["x", "y", "z"]
                    .iter()
                    .map(|s| s.to_string())
                    .take(e.coords[0].len()),
            );
            header.extend((3..e.coords[0].len()).map(|d| format!("dim{d}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let mut csv = Csv::new(prov, &header);
            for (v, c) in e.coords.iter().enumerate() {
                let mut row = vec![v.to_string()];
                row.extend(c.iter().map(|x| x.to_string()));
                csv.row(&row);
            }
            csv.write(&dir.join("embedding.csv"))?;
        }
    }

    if cfg.emits(Format::Svg) {
        if let Some(cloud) = &r.cloud {
            let svg = cloud_plot_data(cloud).to_svg(Some(&prov.line()));
            crate::output::write_text(&dir.join("cloud.svg"), &svg)?;
        }
    }
    Ok(())
}
