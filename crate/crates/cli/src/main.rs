//! `drafttrace`: analyse draft histories from the command line.
//!
//! Exit codes: 0 success, 1 fatal error, 2 partial results (some authors or
//! aggregates could not be computed; see the log and the summaries).

mod aggregate;
mod analyze;
mod config;
mod output;
mod simulate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use drafttrace::synth::WriterKind;
use drafttrace::AngleMethod;

use config::{Format, LevelChoice, RunConfig, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "drafttrace",
    version,
    about = "Measure how a text was written from its saved versions"
)]
struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-author reports under OUT/authors/.
    Analyze(AnalyzeArgs),
    /// Corpus-level files under OUT/aggregate/ from an earlier analyze.
    Aggregate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Analyze followed by aggregate.
    Run(AnalyzeArgs),
    /// Generate a synthetic corpus with known dynamics.
    Simulate(SimulateCli),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Snapshot directories, corpus directories, record files or archives.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Level for the cloud and complexity: auto, char, word, sentence or paragraph.
    #[arg(long, default_value = "sentence")]
    granularity: LevelChoice,
    #[arg(long, default_value_t = 10)]
    min_changes: usize,
    #[arg(long, default_value_t = 1000)]
    n_boot: usize,
    #[arg(long, default_value_t = drafttrace::granularity::DEFAULT_SHUFFLES)]
    n_shuffles: usize,
    /// Null samples for the complexity index.
    #[arg(long, default_value_t = drafttrace::complexity::DEFAULT_PERMUTATIONS)]
    n_perm: usize,
    #[arg(long, default_value_t = drafttrace::trajectory::DEFAULT_FLOW_BAND_DEG)]
    flow_band_deg: f64,
    /// local (law of cosines on the metric) or tsne (angles in the embedding).
    #[arg(long, default_value = "local")]
    angle_method: AngleMethod,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "json,csv,svg"
    )]
    format: Vec<Format>,
}

impl AnalyzeArgs {
    fn config(&self) -> RunConfig {
        let mut formats = self.format.clone();
        formats.sort();
        formats.dedup();
        RunConfig {
            seed: self.seed,
            granularity: self.granularity,
            min_changes: self.min_changes,
            n_boot: self.n_boot,
            n_shuffles: self.n_shuffles,
            n_perm: self.n_perm,
            flow_band_deg: self.flow_band_deg,
            angle_method: self.angle_method,
            formats,
        }
    }
}

#[derive(Args)]
struct SimulateCli {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    authors: usize,
    /// Writer kinds assigned round-robin; defaults to all of them.
    #[arg(long, value_delimiter = ',')]
    kinds: Vec<WriterKind>,
    /// Version count, or the minimum when --max-versions is given.
    #[arg(long, default_value_t = 20)]
    n_versions: usize,
    #[arg(long)]
    max_versions: Option<usize>,
    #[arg(long, default_value_t = 8)]
    text_scale: usize,
    #[arg(long, default_value_t = 0.4)]
    churn_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
enum Status {
    Success,
    Partial,
}

fn analyze(args: &AnalyzeArgs) -> Result<Status> {
    let outcome = analyze::run(&args.input, &args.out, &args.config())?;
    log::info!(
        "analysed {} authors, {} excluded, {} flagged",
        outcome.manifest.authors.len(),
        outcome.manifest.excluded.len(),
        outcome.manifest.failed.len()
    );
    Ok(if outcome.partial {
        Status::Partial
    } else {
        Status::Success
    })
}

fn aggregate(out: &Path) -> Result<Status> {
    let outcome = aggregate::run(out)?;
    Ok(if outcome.partial {
        Status::Partial
    } else {
        Status::Success
    })
}

fn dispatch(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Aggregate { out } => aggregate(&out),
        Command::Run(a) => Ok(analyze(&a)?.max(aggregate(&a.out)?)),
        Command::Simulate(s) => {
            let kinds = if s.kinds.is_empty() {
                WriterKind::ALL.to_vec()
            } else {
                s.kinds
            };
            let authors = simulate::run(
                &s.out,
                &simulate::SimulateArgs {
                    authors: s.authors,
                    kinds,
                    n_versions: s.n_versions,
                    max_versions: s.max_versions,
                    text_scale: s.text_scale,
                    churn_fraction: s.churn_fraction,
                    seed: s.seed,
                },
            )?;
            log::info!(
                "wrote {} synthetic authors to {}",
                authors.len(),
                s.out.display()
            );
            Ok(Status::Success)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match dispatch(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
