//! Version histories and their ingestion from disk.
//!
//! Three on-disk layouts are accepted:
//!
//! * a snapshot directory, one UTF-8 text file per version, ordered by file
//!   name;
//! * a line-delimited record file (`.jsonl`/`.ndjson`), one JSON object per
//!   line with `author_id`, optional ISO-8601 `timestamp`, and `text`;
//! * a zip or tar archive (optionally gzip-compressed) holding per-author
//!   snapshot directories.
//!
//! A directory whose entries include subdirectories is read as a corpus
//! root: every subdirectory is one author's snapshot directory.
//!
//! All text is normalised on the way in: line endings become `\n` and the
//! string is put in Unicode canonical composition (NFC).

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime, SubsecRound, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Version {
    pub index: usize,
    pub timestamp: Option<DateTime<Utc>>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionHistory {
    pub author_id: String,
    pub versions: Vec<Version>,
    #[serde(default)]
    pub source_meta: BTreeMap<String, String>,
}

impl VersionHistory {
    /// Builds a history from raw texts in order, normalising each one.
    pub fn from_texts<I, S>(author_id: impl Into<String>, texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let versions = texts
            .into_iter()
            .enumerate()
            .map(|(index, t)| Version {
                index,
                timestamp: None,
                text: normalize_text(t.as_ref()),
            })
            .collect();
        VersionHistory {
            author_id: author_id.into(),
            versions,
            source_meta: BTreeMap::new(),
        }
    }

    /// Number of versions, `t_f`.
    pub fn len(&self) -> usize {
        self.versions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.versions.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.versions.iter().map(|v| v.text.as_str()).collect()
    }

    pub fn first(&self) -> Option<&Version> {
        self.versions.first()
    }

    pub fn last(&self) -> Option<&Version> {
        self.versions.last()
    }

    pub(crate) fn require_versions(&self, required: usize) -> Result<()> {
        if self.len() < required {
            return Err(Error::TooFew {
                what: "versions",
                required,
                got: self.len(),
            });
        }
        Ok(())
    }

    fn reindex(&mut self) {
        for (i, v) in self.versions.iter_mut().enumerate() {
            v.index = i;
        }
    }
}

/// Canonical composition plus single-character line endings.
pub fn normalize_text(text: &str) -> String {
    if !text.contains('\r') && is_nfc_quick(text.chars()) == IsNormalized::Yes {
        return text.to_string();
    }
    text.replace("\r\n", "\n")
        .replace('\r', "\n")
        .nfc()
        .collect()
}

/// Drops every version whose text equals its predecessor's.
pub fn dedup_consecutive(mut history: VersionHistory) -> VersionHistory {
    history
        .versions
        .dedup_by(|next, prev| next.text == prev.text);
    history.reindex();
    history
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub author_id: String,
    pub versions: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub histories: Vec<VersionHistory>,
    pub filter_log: Vec<Exclusion>,
}

impl Corpus {
    pub fn new(histories: Vec<VersionHistory>) -> Self {
        Corpus {
            histories,
            filter_log: Vec::new(),
        }
    }
}

/// Keeps histories with at least `min_changes` versions beyond the first.
pub fn filter_active(corpus: Corpus, min_changes: usize) -> Corpus {
    let Corpus {
        histories,
        mut filter_log,
    } = corpus;
    let mut kept = Vec::with_capacity(histories.len());
    for h in histories {
        let changes = h.len().saturating_sub(1);
        if changes >= min_changes {
            kept.push(h);
        } else {
            filter_log.push(Exclusion {
                author_id: h.author_id.clone(),
                versions: h.len(),
                reason: format!("{changes} changes, fewer than {min_changes}"),
            });
        }
    }
    Corpus {
        histories: kept,
        filter_log,
    }
}

/// Where a history (or several) comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    SnapshotDir(PathBuf),
    CorpusDir(PathBuf),
    RecordFile(PathBuf),
    Archive(PathBuf),
}

impl Source {
    pub fn detect(path: impl AsRef<Path>) -> Result<Source> {
        let path = path.as_ref();
        let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
        if meta.is_dir() {
            let has_subdir = read_dir_sorted(path)?.iter().any(|p| p.is_dir());
            return Ok(if has_subdir {
                Source::CorpusDir(path.to_path_buf())
            } else {
                Source::SnapshotDir(path.to_path_buf())
            });
        }
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        if [".zip", ".tar", ".tar.gz", ".tgz"]
            .iter()
            .any(|ext| name.ends_with(ext))
        {
            Ok(Source::Archive(path.to_path_buf()))
        } else if [".jsonl", ".ndjson", ".json"]
            .iter()
            .any(|ext| name.ends_with(ext))
        {
            Ok(Source::RecordFile(path.to_path_buf()))
        } else {
            Err(Error::UnsupportedSource(path.display().to_string()))
        }
    }

    pub fn path(&self) -> &Path {
        match self {
            Source::SnapshotDir(p)
            | Source::CorpusDir(p)
            | Source::RecordFile(p)
            | Source::Archive(p) => p,
        }
    }
}

/// Loads exactly one history from `source`.
pub fn load_history(source: &Source) -> Result<VersionHistory> {
    let mut all = load_histories(source)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        n => Err(Error::MultipleAuthors(
            source.path().display().to_string(),
            n,
        )),
    }
}

/// Loads every history a source holds, in author order.
pub fn load_histories(source: &Source) -> Result<Vec<VersionHistory>> {
    match source {
        Source::SnapshotDir(p) => load_snapshot_dir(p).map(|h| vec![h]),
        Source::CorpusDir(p) => {
            let dirs: Vec<PathBuf> = read_dir_sorted(p)?
                .into_iter()
                .filter(|d| d.is_dir())
                .collect();
            dirs.par_iter().map(|d| load_snapshot_dir(d)).collect()
        }
        Source::RecordFile(p) => load_record_file(p),
        Source::Archive(p) => load_archive(p),
    }
}

/// Loads and deduplicates every history under `paths`. Sources are read in
/// parallel; the result keeps input order.
pub fn load_corpus<P: AsRef<Path> + Sync>(paths: &[P]) -> Result<Corpus> {
    let loaded: Vec<Vec<VersionHistory>> = paths
        .par_iter()
        .map(|p| Source::detect(p).and_then(|s| load_histories(&s)))
        .collect::<Result<_>>()?;
    Ok(Corpus::new(
        loaded
            .into_iter()
            .flatten()
            .map(dedup_consecutive)
            .collect(),
    ))
}

fn is_hidden(path: &Path) -> bool {
    path.file_name()
        .is_some_and(|n| n.to_string_lossy().starts_with('.'))
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.retain(|p| !is_hidden(p));
    entries.sort();
    Ok(entries)
}

fn decode(bytes: Vec<u8>, origin: &str) -> Result<String> {
    String::from_utf8(bytes)
        .map(|s| normalize_text(&s))
        .map_err(|_| Error::Undecodable(origin.to_string()))
}

fn author_from_path(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn history_from(
    author_id: String,
    texts: Vec<String>,
    meta: BTreeMap<String, String>,
) -> VersionHistory {
    let versions = texts
        .into_iter()
        .enumerate()
        .map(|(index, text)| Version {
            index,
            timestamp: None,
            text,
        })
        .collect();
    VersionHistory {
        author_id,
        versions,
        source_meta: meta,
    }
}

fn load_snapshot_dir(dir: &Path) -> Result<VersionHistory> {
    let files: Vec<PathBuf> = read_dir_sorted(dir)?
        .into_iter()
        .filter(|p| p.is_file())
        .collect();
    if files.is_empty() {
        return Err(Error::ZeroSnapshots(dir.display().to_string()));
    }
    let texts = files
        .iter()
        .map(|f| {
            let bytes = fs::read(f).map_err(|e| Error::io(f, e))?;
            decode(bytes, &f.display().to_string())
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = BTreeMap::from([
        ("source".to_string(), dir.display().to_string()),
        ("format".to_string(), "snapshot-dir".to_string()),
    ]);
    Ok(history_from(author_from_path(dir), texts, meta))
}

#[derive(Deserialize)]
struct Record {
    author_id: String,
    #[serde(default)]
    timestamp: Option<String>,
    text: String,
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let parsed = DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&Utc))
        .ok()
        .or_else(|| {
            ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"]
                .iter()
                .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
                .map(|n| n.and_utc())
        })?;
    Some(parsed.trunc_subsecs(0))
}

type TimedText = (Option<DateTime<Utc>>, String);

fn load_record_file(path: &Path) -> Result<Vec<VersionHistory>> {
    let origin = path.display().to_string();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let content = String::from_utf8(bytes).map_err(|_| Error::Undecodable(origin.clone()))?;
    // author -> (timestamp, text) in record order
    let mut grouped: BTreeMap<String, Vec<TimedText>> = BTreeMap::new();
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| Error::BadRecord {
            path: origin.clone(),
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        let timestamp = match rec.timestamp.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(raw) => Some(parse_timestamp(raw).ok_or_else(|| Error::BadRecord {
                path: origin.clone(),
                line: lineno + 1,
                reason: format!("unparseable timestamp `{raw}`"),
            })?),
        };
        grouped
            .entry(rec.author_id)
            .or_default()
            .push((timestamp, normalize_text(&rec.text)));
    }
    if grouped.is_empty() {
        return Err(Error::ZeroSnapshots(origin));
    }
    Ok(grouped
        .into_iter()
        .map(|(author, mut records)| {
            // stable: equal timestamps keep record order
            if records.iter().all(|(t, _)| t.is_some()) {
                records.sort_by_key(|(t, _)| *t);
            }
            let versions = records
                .into_iter()
                .enumerate()
                .map(|(index, (timestamp, text))| Version {
                    index,
                    timestamp,
                    text,
                })
                .collect();
            VersionHistory {
                author_id: author,
                versions,
                source_meta: BTreeMap::from([
                    ("source".to_string(), origin.clone()),
                    ("format".to_string(), "records".to_string()),
                ]),
            }
        })
        .collect())
}

/// `(path inside archive, bytes)` for every regular file.
fn archive_entries(path: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let origin = path.display().to_string();
    let bad = |reason: String| Error::Archive {
        path: origin.clone(),
        reason,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = origin.to_lowercase();
    let mut out = Vec::new();
    if name.ends_with(".zip") {
        let mut zip = zip::ZipArchive::new(file).map_err(|e| bad(e.to_string()))?;
        for i in 0..zip.len() {
            let mut entry = zip.by_index(i).map_err(|e| bad(e.to_string()))?;
            if !entry.is_file() {
                continue;
            }
            let mut bytes = Vec::new();
            entry
                .read_to_end(&mut bytes)
                .map_err(|e| Error::io(path, e))?;
            out.push((entry.name().to_string(), bytes));
        }
    } else {
        let reader: Box<dyn Read> = if name.ends_with(".gz") || name.ends_with(".tgz") {
            Box::new(flate2::read::GzDecoder::new(file))
        } else {
            Box::new(file)
        };
        let mut tar = tar::Archive::new(reader);
        for entry in tar.entries().map_err(|e| bad(e.to_string()))? {
            let mut entry = entry.map_err(|e| bad(e.to_string()))?;
            if !entry.header().entry_type().is_file() {
                continue;
            }
            let entry_path = entry
                .path()
                .map_err(|e| bad(e.to_string()))?
                .to_string_lossy()
                .into_owned();
            let mut bytes = Vec::new();
            entry
                .read_to_end(&mut bytes)
                .map_err(|e| Error::io(path, e))?;
            out.push((entry_path, bytes));
        }
    }
    Ok(out)
}

fn load_archive(path: &Path) -> Result<Vec<VersionHistory>> {
    let origin = path.display().to_string();
    // parent directory inside the archive -> [(file name, bytes)]
    let mut grouped: BTreeMap<String, Vec<(String, Vec<u8>)>> = BTreeMap::new();
    for (entry, bytes) in archive_entries(path)? {
        let entry = entry.trim_start_matches("./").to_string();
        let Some((dir, file)) = entry.rsplit_once('/') else {
            continue;
        };
        if file.starts_with('.') || dir.split('/').any(|c| c.starts_with('.') && c != ".") {
            continue;
        }
        grouped
            .entry(dir.to_string())
            .or_default()
            .push((file.to_string(), bytes));
    }
    if grouped.is_empty() {
        return Err(Error::ZeroSnapshots(origin));
    }
    grouped
        .into_iter()
        .map(|(dir, mut files)| {
            files.sort_by(|a, b| a.0.cmp(&b.0));
            let texts = files
                .into_iter()
                .map(|(f, bytes)| decode(bytes, &format!("{origin}:{dir}/{f}")))
                .collect::<Result<Vec<_>>>()?;
            let author = dir.rsplit('/').next().unwrap_or(&dir).to_string();
            let meta = BTreeMap::from([
                ("source".to_string(), format!("{origin}:{dir}")),
                ("format".to_string(), "archive".to_string()),
            ]);
            Ok(history_from(author, texts, meta))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(h: &VersionHistory) -> Vec<&str> {
        h.texts()
    }

    #[test]
    fn dedup_examples() {
        let h = dedup_consecutive(VersionHistory::from_texts("x", ["a", "a", "b"]));
        assert_eq!(texts(&h), ["a", "b"]);
        assert_eq!(h.versions[1].index, 1);

        let h = dedup_consecutive(VersionHistory::from_texts("x", ["a", "b", "a"]));
        assert_eq!(texts(&h), ["a", "b", "a"]);

        let h = dedup_consecutive(VersionHistory::from_texts("x", ["a"]));
        assert_eq!(texts(&h), ["a"]);
    }

    #[test]
    fn normalisation_removes_spurious_differences() {
        // precomposed vs combining acute, CRLF vs LF
        let h = dedup_consecutive(VersionHistory::from_texts(
            "x",
            ["caf\u{e9}\r\nok", "cafe\u{301}\nok"],
        ));
        assert_eq!(h.len(), 1);
        assert_eq!(h.versions[0].text, "caf\u{e9}\nok");
    }

    #[test]
    fn filter_examples() {
        let many = VersionHistory::from_texts("many", (0..11).map(|i| i.to_string()));
        let few = VersionHistory::from_texts("few", (0..5).map(|i| i.to_string()));
        let c = filter_active(Corpus::new(vec![many.clone(), few.clone()]), 10);
        assert_eq!(c.histories.len(), 1);
        assert_eq!(c.histories[0].author_id, "many");
        assert_eq!(c.filter_log.len(), 1);
        assert_eq!(c.filter_log[0].author_id, "few");

        let c = filter_active(Corpus::new(vec![many, few]), 1);
        assert_eq!(c.histories.len(), 2);
        assert!(c.filter_log.is_empty());
    }

    #[test]
    fn timestamps_parse_to_seconds() {
        let t = parse_timestamp("2019-01-22T10:00:05.750Z").unwrap();
        assert_eq!(t.to_rfc3339(), "2019-01-22T10:00:05+00:00");
        assert!(parse_timestamp("2019-01-22 10:00:05").is_some());
        assert!(parse_timestamp("yesterday").is_none());
    }

    proptest! {
        #[test]
        fn dedup_is_idempotent(v in prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 0..20)) {
            let once = dedup_consecutive(VersionHistory::from_texts("x", &v));
            let twice = dedup_consecutive(once.clone());
            prop_assert_eq!(&once, &twice);
            for w in once.versions.windows(2) {
                prop_assert_ne!(&w[0].text, &w[1].text);
            }
        }

        #[test]
        fn filter_accounts_for_every_history(lens in prop::collection::vec(1usize..15, 0..12), min in 1usize..12) {
            let hs: Vec<_> = lens
                .iter()
                .enumerate()
                .map(|(k, n)| VersionHistory::from_texts(format!("a{k}"), (0..*n).map(|i| i.to_string())))
                .collect();
            let total = hs.len();
            let c = filter_active(Corpus::new(hs), min);
            prop_assert_eq!(c.histories.len() + c.filter_log.len(), total);
        }
    }
}
