//! Edit-history analytics for text drafts.
//!
//! Given the recorded snapshots of a document, this crate reconstructs how
//! it was written and measures the process:
//!
//! * [`granularity`] picks the token level at which adjacent edits behave
//!   as single events, by comparing run-length statistics of the edit mask
//!   against a shuffled null with the Bhattacharyya distance.
//! * [`cloud`] aligns consecutive versions sentence by sentence into a
//!   global coordinate system and counts edits per sentence slot.
//! * [`complexity`] turns those counts into a normalised Shannon–Wiener
//!   index.
//! * [`exploration`] measures how far each version strays from a shortest
//!   edit path between the first and last draft.
//! * [`trajectory`] embeds the versions, measures turning angles between
//!   consecutive steps and derives the twist ratio.
//!
//! [`synth`] generates histories with known dynamics; it is the oracle the
//! test suites check every measure against.

pub mod cloud;
pub mod complexity;
pub mod corpus;
pub mod editdist;
pub mod error;
pub mod exploration;
pub mod granularity;
pub mod segment;
pub mod stats;
pub mod synth;
pub mod trajectory;

pub use cloud::{build_cloud, WritingCloud};
pub use complexity::{shannon_wiener, ComplexityReport};
pub use corpus::{dedup_consecutive, filter_active, Corpus, Source, Version, VersionHistory};
pub use editdist::{EditMask, EditOp, EditScript, OpKind};
pub use error::{Error, Result};
pub use exploration::{exploration_curve, ExplorationCurve};
pub use granularity::{select_granularity, GranularityReport, RunDistribution};
pub use segment::{segment, Granularity, TokenSequence};
pub use stats::{ConfidenceInterval, Correlation, GriddedCurve};
pub use synth::{simulate, WriterKind, WriterProfile};
pub use trajectory::{AngleMethod, AngleSeries, DistanceMatrix, StepLabel, TrajectoryEmbedding};

/// Crate version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
