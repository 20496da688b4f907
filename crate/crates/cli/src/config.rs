use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use drafttrace::{AngleMethod, Granularity};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_SEED: u64 = 20_190_601;

/// Level used for the cloud and complexity measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelChoice {
    /// Whatever granularity selection picks for the author.
    Auto,
    Fixed(Granularity),
}

impl fmt::Display for LevelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelChoice::Auto => f.write_str("auto"),
            LevelChoice::Fixed(g) => write!(f, "{g}"),
        }
    }
}

impl FromStr for LevelChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LevelChoice::Auto);
        }
        s.parse::<Granularity>()
            .map(LevelChoice::Fixed)
            .map_err(|e| e.to_string())
    }
}

impl Serialize for LevelChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LevelChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

/// Everything that influences analysis results. Paths and thread counts are
/// deliberately absent so the digest identifies the computation only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub granularity: LevelChoice,
    pub min_changes: usize,
    pub n_boot: usize,
    pub n_shuffles: usize,
    pub n_perm: usize,
    pub flow_band_deg: f64,
    pub angle_method: AngleMethod,
    pub formats: Vec<Format>,
}

impl RunConfig {
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises");
        let hash = Sha256::digest(&canonical);
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            tool: "drafttrace".into(),
            version: drafttrace::VERSION.into(),
            seed: self.seed,
            config_digest: self.digest(),
        }
    }

    pub fn emits(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_digest: String,
}

impl Provenance {
    pub fn line(&self) -> String {
        format!(
            "{} {} seed={} config={}",
            self.tool, self.version, self.seed, self.config_digest
        )
    }
}

/// Written by `analyze`; `aggregate` reads its configuration back from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub provenance: Provenance,
    pub config: RunConfig,
    pub inputs: Vec<PathBuf>,
    pub authors: Vec<String>,
    pub excluded: Vec<drafttrace::corpus::Exclusion>,
    pub failed: Vec<String>,
}
