//! Writes a synthetic corpus as snapshot directories plus truth logs.

use std::path::Path;

use anyhow::{bail, Result};
use drafttrace::stats::derive_seed;
use drafttrace::synth::{simulate_with_truth, WriterKind, WriterProfile};
use rayon::prelude::*;

use crate::output::write_text;

pub struct SimulateArgs {
    pub authors: usize,
    pub kinds: Vec<WriterKind>,
    pub n_versions: usize,
    /// When set, each author draws its version count from
    /// `n_versions..=max_versions`.
    pub max_versions: Option<usize>,
    pub text_scale: usize,
    pub churn_fraction: f64,
    pub seed: u64,
}

/// Author `k` gets kind `kinds[k % kinds.len()]` and its own derived seed.
/// Layout: `out/<author>/<NNN>.txt` and `out/<author>.truth.json`.
pub fn run(out: &Path, args: &SimulateArgs) -> Result<Vec<String>> {
    if args.kinds.is_empty() || args.authors == 0 {
        bail!("nothing to simulate");
    }
    let top = args.max_versions.unwrap_or(args.n_versions);
    if top < args.n_versions {
        bail!("max versions {top} below min versions {}", args.n_versions);
    }
    let width = top.saturating_sub(1).to_string().len().max(3);
    (0..args.authors)
        .into_par_iter()
        .map(|k| {
            let kind = args.kinds[k % args.kinds.len()];
            let spread = (top - args.n_versions + 1) as u64;
            let n_versions = args.n_versions
                + (derive_seed(args.seed, "simulate-versions", &k.to_string()) % spread) as usize;
            let mut profile = WriterProfile::new(
                kind,
                n_versions,
                args.text_scale,
                derive_seed(args.seed, "simulate", &k.to_string()),
            );
            profile.churn_fraction = args.churn_fraction;
            let (history, mut truth) = simulate_with_truth(&profile)?;
            let author = format!("{k:03}_{kind}");
            truth.author_id = author.clone();
            for v in &history.versions {
                write_text(
                    &out.join(&author).join(format!("{:0width$}.txt", v.index)),
                    &v.text,
                )?;
            }
            let mut log = serde_json::to_string_pretty(&truth)?;
            log.push('\n');
            write_text(&out.join(format!("{author}.truth.json")), &log)?;
            Ok(author)
        })
        .collect()
}
