//! Synthetic writers with known dynamics.
//!
//! Every generator is deterministic given its seed and returns, beside the
//! history, a truth log of what it did. Test suites compare the measures
//! against that log instead of against the analysis code.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::VersionHistory;
use crate::error::{Error, Result};
use crate::stats::seeded_rng;

/// Lowercase letters only, none of which is a recognised abbreviation.
const WORDS: &[&str] = &[
    "about", "above", "across", "after", "again", "air", "almost", "along", "animal", "answer",
    "apple", "area", "around", "autumn", "bank", "basket", "beach", "before", "behind", "below",
    "beside", "between", "bird", "black", "blue", "boat", "body", "book", "bread", "bridge",
    "bright", "brother", "brown", "building", "candle", "carry", "castle", "change", "child",
    "circle", "city", "clear", "clock", "cloud", "coast", "cold", "color", "common", "corner",
    "country", "course", "dark", "desert", "distant", "door", "dream", "during", "early", "earth",
    "easy", "empty", "engine", "evening", "every", "family", "farmer", "field", "finger", "fire",
    "flower", "follow", "forest", "friend", "garden", "gentle", "glass", "golden", "grass",
    "green", "ground", "group", "happy", "harbor", "heavy", "hidden", "hill", "history", "horse",
    "house", "hunter", "island", "journey", "kitchen", "ladder", "language", "large", "later",
    "letter", "light", "little", "long", "machine", "market", "memory", "metal", "middle",
    "minute", "moment", "morning", "mountain", "music", "narrow", "never", "night", "north",
    "number", "ocean", "often", "orange", "paper", "people", "picture", "plain", "planet",
    "pocket", "quiet", "rain", "river", "road", "rock", "round", "sailor", "salt", "school",
    "season", "shadow", "short", "silent", "silver", "simple", "sister", "slowly", "small", "snow",
    "soft", "song", "south", "spring", "square", "station", "stone", "story", "street", "strong",
    "summer", "table", "teacher", "thunder", "tower", "town", "travel", "under", "valley",
    "village", "voice", "wall", "warm", "water", "window", "winter", "wooden", "world", "yellow",
    "young",
];

const SENTENCES_PER_PARAGRAPH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WriterKind {
    AppendOnly,
    FocalReviser,
    UniformReviser,
    Explorer,
    WordRewriter,
    CharFlipper,
}

impl WriterKind {
    pub const ALL: [WriterKind; 6] = [
        WriterKind::AppendOnly,
        WriterKind::FocalReviser,
        WriterKind::UniformReviser,
        WriterKind::Explorer,
        WriterKind::WordRewriter,
        WriterKind::CharFlipper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WriterKind::AppendOnly => "append_only",
            WriterKind::FocalReviser => "focal_reviser",
            WriterKind::UniformReviser => "uniform_reviser",
            WriterKind::Explorer => "explorer",
            WriterKind::WordRewriter => "word_rewriter",
            WriterKind::CharFlipper => "char_flipper",
        }
    }
}

impl fmt::Display for WriterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WriterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        WriterKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown writer kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WriterProfile {
    pub kind: WriterKind,
    pub n_versions: usize,
    /// Approximate sentence count of the final draft.
    pub text_scale: usize,
    /// Explorer: planted churn as a fraction of the final length.
    pub churn_fraction: f64,
    /// Focal reviser: the sentence every version rewrites. Defaults to the
    /// middle one.
    pub focal_target: Option<usize>,
    /// Uniform reviser: half-open sentence range the targets are drawn
    /// from. Defaults to the whole text.
    pub revision_window: Option<(usize, usize)>,
    pub seed: u64,
}

impl WriterProfile {
    pub fn new(kind: WriterKind, n_versions: usize, text_scale: usize, seed: u64) -> Self {
        WriterProfile {
            kind,
            n_versions,
            text_scale,
            churn_fraction: 0.4,
            focal_target: None,
            revision_window: None,
            seed,
        }
    }

    pub fn author_id(&self) -> String {
        format!("{}_{}", self.kind, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TruthEvent {
    /// Characters appended at the end.
    Append { version: usize, chars: usize },
    /// Sentence `sentence` replaced by a fresh one.
    SubstituteSentence { version: usize, sentence: usize },
    /// Word `word` (counted over the whole text) replaced.
    RewriteWord {
        version: usize,
        word: usize,
        char_start: usize,
        old_len: usize,
        new_len: usize,
    },
    /// One character changed in place.
    FlipChar { version: usize, position: usize },
    /// Body text written and churn resized in the same step.
    ExplorerStep {
        version: usize,
        body_chars: usize,
        churn_chars: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChurnTruth {
    /// Character offset where churn text sits.
    pub position: usize,
    pub peak_chars: usize,
    pub peak_version: usize,
    /// Distance from first to final version.
    pub d0f: usize,
    /// `2 * peak_chars / d0f`, the detour at the peak version.
    pub planted_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthLog {
    pub author_id: String,
    pub profile: WriterProfile,
    pub events: Vec<TruthEvent>,
    pub churn: Option<ChurnTruth>,
}

fn word(rng: &mut ChaCha8Rng) -> &'static str {
    WORDS.choose(rng).expect("word list is not empty")
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(6..=12);
    let words: Vec<&str> = (0..n).map(|_| word(rng)).collect();
    format!("{}.", capitalize(&words.join(" ")))
}

fn fresh_sentence(rng: &mut ChaCha8Rng, avoid: &str) -> String {
    loop {
        let s = sentence(rng);
        if s != avoid {
            return s;
        }
    }
}

fn render(sentences: &[String]) -> String {
    sentences
        .chunks(SENTENCES_PER_PARAGRAPH)
        .map(|p| p.join(" "))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Generates the history of `profile`.
pub fn simulate(profile: &WriterProfile) -> Result<VersionHistory> {
    simulate_with_truth(profile).map(|(h, _)| h)
}

pub fn simulate_with_truth(profile: &WriterProfile) -> Result<(VersionHistory, TruthLog)> {
    if profile.n_versions < 2 {
        return Err(infeasible("n_versions must be at least 2"));
    }
    if profile.text_scale < 1 {
        return Err(infeasible("text_scale must be at least 1"));
    }
    let mut rng = seeded_rng(profile.seed);
    let (texts, events, churn) = match profile.kind {
        WriterKind::AppendOnly => append_only(profile, &mut rng)?,
        WriterKind::FocalReviser => {
            let target = profile.focal_target.unwrap_or(profile.text_scale / 2);
            if target >= profile.text_scale {
                return Err(infeasible(format!(
                    "focal target {target} outside {} sentences",
                    profile.text_scale
                )));
            }
            reviser(profile, &mut rng, |_| target)?
        }
        WriterKind::UniformReviser => {
            let (lo, hi) = profile.revision_window.unwrap_or((0, profile.text_scale));
            if lo >= hi || hi > profile.text_scale {
                return Err(infeasible(format!(
                    "revision window {lo}..{hi} is empty or too wide"
                )));
            }
            reviser(profile, &mut rng, |rng| rng.random_range(lo..hi))?
        }
        WriterKind::Explorer => explorer(profile, &mut rng)?,
        WriterKind::WordRewriter => word_rewriter(profile, &mut rng)?,
        WriterKind::CharFlipper => char_flipper(profile, &mut rng)?,
    };
    let author_id = profile.author_id();
    let history = VersionHistory::from_texts(author_id.clone(), &texts);
    debug_assert!(history.versions.windows(2).all(|w| w[0].text != w[1].text));
    Ok((
        history,
        TruthLog {
            author_id,
            profile: profile.clone(),
            events,
            churn,
        },
    ))
}

type Generated = (Vec<String>, Vec<TruthEvent>, Option<ChurnTruth>);

fn append_only(profile: &WriterProfile, rng: &mut ChaCha8Rng) -> Result<Generated> {
    let sentences: Vec<String> = (0..profile.text_scale).map(|_| sentence(rng)).collect();
    let full: Vec<char> = render(&sentences).chars().collect();
    let n = profile.n_versions;
    if full.len() < n {
        return Err(infeasible(format!(
            "{} characters cannot fill {n} versions",
            full.len()
        )));
    }
    // n - 1 distinct interior cut points, then the full text.
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, full.len() - 1, n - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(full.len());
    let texts = cuts.iter().map(|c| full[..*c].iter().collect()).collect();
    let events = cuts
        .windows(2)
        .enumerate()
        .map(|(t, w)| TruthEvent::Append {
            version: t + 1,
            chars: w[1] - w[0],
        })
        .collect();
    Ok((texts, events, None))
}

fn reviser(
    profile: &WriterProfile,
    rng: &mut ChaCha8Rng,
    mut pick: impl FnMut(&mut ChaCha8Rng) -> usize,
) -> Result<Generated> {
    let mut sentences: Vec<String> = (0..profile.text_scale).map(|_| sentence(rng)).collect();
    let mut texts = vec![render(&sentences)];
    let mut events = Vec::with_capacity(profile.n_versions - 1);
    for version in 1..profile.n_versions {
        let target = pick(rng);
        sentences[target] = fresh_sentence(rng, &sentences[target]);
        texts.push(render(&sentences));
        events.push(TruthEvent::SubstituteSentence {
            version,
            sentence: target,
        });
    }
    Ok((texts, events, None))
}

/// Byte span of every word in `text`.
fn word_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

fn word_rewriter(profile: &WriterProfile, rng: &mut ChaCha8Rng) -> Result<Generated> {
    let sentences: Vec<String> = (0..profile.text_scale).map(|_| sentence(rng)).collect();
    let mut text = render(&sentences);
    let mut texts = vec![text.clone()];
    let mut events = Vec::with_capacity(profile.n_versions - 1);
    for version in 1..profile.n_versions {
        let spans = word_spans(&text);
        let k = rng.random_range(0..spans.len());
        let (s, e) = spans[k];
        let old = &text[s..e];
        let replacement = loop {
            let w = word(rng);
            let w = if old.starts_with(|c: char| c.is_uppercase()) {
                capitalize(w)
            } else {
                w.to_string()
            };
            if w != old {
                break w;
            }
        };
        events.push(TruthEvent::RewriteWord {
            version,
            word: k,
            char_start: text[..s].chars().count(),
            old_len: old.chars().count(),
            new_len: replacement.chars().count(),
        });
        text.replace_range(s..e, &replacement);
        texts.push(text.clone());
    }
    Ok((texts, events, None))
}

fn char_flipper(profile: &WriterProfile, rng: &mut ChaCha8Rng) -> Result<Generated> {
    let sentences: Vec<String> = (0..profile.text_scale).map(|_| sentence(rng)).collect();
    let mut chars: Vec<char> = render(&sentences).chars().collect();
    let letters: Vec<usize> = (0..chars.len())
        .filter(|i| chars[*i].is_ascii_lowercase())
        .collect();
    let mut texts = vec![chars.iter().collect::<String>()];
    let mut events = Vec::with_capacity(profile.n_versions - 1);
    // Character each position held two versions ago, to rule out A == C.
    let mut before_last: Option<(usize, char)> = None;
    for version in 1..profile.n_versions {
        let pos = letters[rng.random_range(0..letters.len())];
        let old = chars[pos];
        let banned = match before_last {
            Some((p, c)) if p == pos => Some(c),
            _ => None,
        };
        let new = loop {
            let c = rng.random_range(b'a'..=b'z') as char;
            if c != old && Some(c) != banned {
                break c;
            }
        };
        chars[pos] = new;
        before_last = Some((pos, old));
        texts.push(chars.iter().collect());
        events.push(TruthEvent::FlipChar {
            version,
            position: pos,
        });
    }
    Ok((texts, events, None))
}

/// Piecewise schedule value at `t` on `[t0, t1]`, rounded.
fn ramp(from: usize, to: usize, t: usize, t0: usize, t1: usize) -> usize {
    let frac = (t - t0) as f64 / (t1 - t0) as f64;
    (from as f64 + (to as f64 - from as f64) * frac).round() as usize
}

/// Writes the body in order while a churn block after the first sentence
/// grows to its peak at mid-process and is deleted again before the end.
///
/// Phase one writes up to 60% of the body. Phase two writes the rest while
/// the churn grows to `C` characters; at its last step the version is the
/// full body plus `C` churn characters, so its detour is exactly `2C/d0f`.
/// Phase three deletes the churn.
fn explorer(profile: &WriterProfile, rng: &mut ChaCha8Rng) -> Result<Generated> {
    let n = profile.n_versions;
    if n < 4 {
        return Err(infeasible("explorer needs at least 4 versions"));
    }
    if profile.text_scale < 2 {
        return Err(infeasible("explorer needs at least 2 sentences"));
    }
    if !(profile.churn_fraction > 0.0 && profile.churn_fraction.is_finite()) {
        return Err(infeasible("churn fraction must be positive"));
    }
    let sentences: Vec<String> = (0..profile.text_scale).map(|_| sentence(rng)).collect();
    let body: Vec<char> = render(&sentences).chars().collect();
    let p0 = sentences[0].chars().count() + 1;
    let churn_len = (profile.churn_fraction * body.len() as f64).round() as usize;
    let mut churn: Vec<char> = Vec::new();
    while churn.len() < churn_len {
        churn.extend(sentence(rng).chars());
        churn.push(' ');
    }
    churn.truncate(churn_len);

    let last = n - 1;
    let t1 = ((0.2 * last as f64).round() as usize).max(1);
    let t2 = ((0.5 * last as f64).round() as usize).clamp(t1 + 1, last - 1);
    let l60 = ((0.6 * body.len() as f64).round() as usize).max(p0);
    if l60 - p0 < t1 || body.len() - l60 < t2 - t1 || churn_len < last - t2 {
        return Err(infeasible(
            "explorer text too short for the requested version count",
        ));
    }

    let mut texts = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n - 1);
    for t in 0..n {
        let (written, churned) = if t <= t1 {
            (ramp(p0, l60, t, 0, t1), 0)
        } else if t <= t2 {
            (
                ramp(l60, body.len(), t, t1, t2),
                ramp(0, churn_len, t, t1, t2),
            )
        } else {
            (body.len(), ramp(churn_len, 0, t, t2, last))
        };
        let mut text: String = body[..p0].iter().collect();
        text.extend(&churn[..churned]);
        text.extend(&body[p0..written]);
        texts.push(text);
        if t > 0 {
            events.push(TruthEvent::ExplorerStep {
                version: t,
                body_chars: written,
                churn_chars: churned,
            });
        }
    }
    let d0f = body.len() - p0;
    Ok((
        texts,
        events,
        Some(ChurnTruth {
            position: p0,
            peak_chars: churn_len,
            peak_version: t2,
            d0f,
            planted_bound: 2.0 * churn_len as f64 / d0f as f64,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::dedup_consecutive;
    use crate::segment::{segment, Granularity};

    #[test]
    fn word_list_is_clean() {
        for w in WORDS {
            assert!(w.chars().all(|c| c.is_ascii_lowercase()), "{w}");
        }
        let s = render(&[String::from("Dark river."), String::from("Cold stone.")]);
        assert_eq!(
            segment(&s, Granularity::Sentence).tokens,
            vec!["Dark river.", "Cold stone."]
        );
    }

    #[test]
    fn histories_are_deterministic_and_distinct() {
        for kind in WriterKind::ALL {
            let p = WriterProfile::new(kind, 12, 8, 42);
            let (a, ta) = simulate_with_truth(&p).unwrap();
            let (b, tb) = simulate_with_truth(&p).unwrap();
            assert_eq!(a, b);
            assert_eq!(ta, tb);
            assert_eq!(a.len(), 12);
            assert_eq!(dedup_consecutive(a.clone()), a, "{kind}");
        }
    }

    #[test]
    fn append_only_extends() {
        let h = simulate(&WriterProfile::new(WriterKind::AppendOnly, 20, 5, 1)).unwrap();
        for w in h.versions.windows(2) {
            assert!(w[1].text.starts_with(&w[0].text) && w[1].text.len() > w[0].text.len());
        }
    }

    #[test]
    fn focal_reviser_touches_one_sentence() {
        let h = simulate(&WriterProfile::new(WriterKind::FocalReviser, 10, 7, 3)).unwrap();
        for w in h.versions.windows(2) {
            let a = segment(&w[0].text, Granularity::Sentence).tokens;
            let b = segment(&w[1].text, Granularity::Sentence).tokens;
            let diff: Vec<usize> = (0..a.len()).filter(|i| a[*i] != b[*i]).collect();
            assert_eq!(diff, vec![3]);
        }
    }

    #[test]
    fn char_flipper_changes_one_character() {
        let h = simulate(&WriterProfile::new(WriterKind::CharFlipper, 30, 3, 8)).unwrap();
        for w in h.versions.windows(2) {
            let changed = w[0]
                .text
                .chars()
                .zip(w[1].text.chars())
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(changed, 1);
        }
        for w in h.versions.windows(3) {
            assert_ne!(w[0].text, w[2].text);
        }
    }

    #[test]
    fn explorer_bookkeeping() {
        let (h, truth) =
            simulate_with_truth(&WriterProfile::new(WriterKind::Explorer, 21, 10, 5)).unwrap();
        let churn = truth.churn.unwrap();
        assert_eq!(churn.peak_version, 10);
        let first = &h.versions[0].text;
        let last = &h.versions[20].text;
        assert!(last.starts_with(first.as_str()));
        assert_eq!(last.chars().count() - first.chars().count(), churn.d0f);
        let peak = &h.versions[10].text;
        assert_eq!(
            peak.chars().count(),
            last.chars().count() + churn.peak_chars
        );
    }

    #[test]
    fn infeasible_profiles() {
        let mut p = WriterProfile::new(WriterKind::FocalReviser, 5, 3, 0);
        p.focal_target = Some(3);
        assert!(simulate(&p).is_err());
        assert!(simulate(&WriterProfile::new(WriterKind::AppendOnly, 1, 3, 0)).is_err());
        assert!(simulate(&WriterProfile::new(WriterKind::AppendOnly, 500, 1, 0)).is_err());
        assert!(simulate(&WriterProfile::new(WriterKind::Explorer, 3, 5, 0)).is_err());
        assert_eq!(
            "char-flipper".parse::<WriterKind>().unwrap(),
            WriterKind::CharFlipper
        );
    }
}
