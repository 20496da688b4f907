//! Character, word, sentence and paragraph segmentation with offsets.
//!
//! Offsets are in Unicode scalar values (not bytes), so a span `(s, e)`
//! selects `text.chars().skip(s).take(e - s)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Character,
    Word,
    Sentence,
    Paragraph,
}

impl Granularity {
    /// Finest to coarsest.
    pub const ALL: [Granularity; 4] = [
        Granularity::Character,
        Granularity::Word,
        Granularity::Sentence,
        Granularity::Paragraph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Granularity::Character => "character",
            Granularity::Word => "word",
            Granularity::Sentence => "sentence",
            Granularity::Paragraph => "paragraph",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "char" | "character" => Ok(Granularity::Character),
            "word" => Ok(Granularity::Word),
            "sentence" => Ok(Granularity::Sentence),
            "paragraph" | "para" => Ok(Granularity::Paragraph),
            other => Err(format!("unknown granularity `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub level: Granularity,
    pub tokens: Vec<String>,
    pub spans: Vec<(usize, usize)>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn from_spans(level: Granularity, chars: &[char], spans: Vec<(usize, usize)>) -> Self {
        let tokens = spans
            .iter()
            .map(|&(s, e)| chars[s..e].iter().collect())
            .collect();
        TokenSequence {
            level,
            tokens,
            spans,
        }
    }
}

/// Abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &[
    "dr.", "mr.", "mrs.", "prof.", "fig.", "eq.", "e.g.", "i.e.", "vs.",
];

const TERMINALS: &[char] = &['.', '!', '?', '…'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '”', '’', '»'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '“', '‘', '«'];

pub fn segment(text: &str, level: Granularity) -> TokenSequence {
    let chars: Vec<char> = text.chars().collect();
    let spans = match level {
        Granularity::Character => (0..chars.len()).map(|i| (i, i + 1)).collect(),
        Granularity::Word => word_spans(&chars),
        Granularity::Sentence => sentence_spans(&chars),
        Granularity::Paragraph => paragraph_spans(&chars),
    };
    TokenSequence::from_spans(level, &chars, spans)
}

/// Renders tokens back into text that segments to the same tokens.
pub fn join(ts: &TokenSequence) -> String {
    let sep = match ts.level {
        Granularity::Character => "",
        Granularity::Word => " ",
        Granularity::Sentence | Granularity::Paragraph => "\n\n",
    };
    ts.tokens.join(sep)
}

fn word_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in chars.iter().enumerate() {
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
        spans.push((s, chars.len()));
    }
    spans
}

/// Index one past the last non-whitespace character in `chars[start..end]`.
fn trim_end(chars: &[char], start: usize, mut end: usize) -> usize {
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    end
}

/// True when the newline at `i` is followed by a whitespace-only line.
fn is_paragraph_break(chars: &[char], i: usize) -> bool {
    debug_assert_eq!(chars[i], '\n');
    chars[i + 1..]
        .iter()
        .find(|c| !(c.is_whitespace() && **c != '\n'))
        .is_some_and(|c| *c == '\n')
}

fn is_abbreviation(chars: &[char], start: usize, period: usize) -> bool {
    let mut k = period;
    while k > start && !chars[k - 1].is_whitespace() {
        k -= 1;
    }
    let word: String = chars[k..=period]
        .iter()
        .skip_while(|c| OPENERS.contains(c))
        .collect::<String>()
        .to_lowercase();
    if ABBREVIATIONS.contains(&word.as_str()) {
        return true;
    }
    if word == "al." {
        // "et al."
        let mut j = k;
        while j > start && chars[j - 1].is_whitespace() {
            j -= 1;
        }
        let prev_end = j;
        while j > start && !chars[j - 1].is_whitespace() {
            j -= 1;
        }
        let prev: String = chars[j..prev_end].iter().collect::<String>().to_lowercase();
        return prev.trim_start_matches(OPENERS) == "et";
    }
    false
}

fn sentence_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let n = chars.len();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < n {
        let c = chars[i];
        let Some(s) = start else {
            if !c.is_whitespace() {
                start = Some(i);
            }
            i += 1;
            continue;
        };
        if c == '\n' && is_paragraph_break(chars, i) {
            spans.push((s, trim_end(chars, s, i)));
            start = None;
            i += 1;
            continue;
        }
        if TERMINALS.contains(&c) {
            let mut j = i;
            while j + 1 < n && TERMINALS.contains(&chars[j + 1]) {
                j += 1;
            }
            let single_period = j == i && c == '.';
            while j + 1 < n && CLOSERS.contains(&chars[j + 1]) {
                j += 1;
            }
            let at_gap = j + 1 == n || chars[j + 1].is_whitespace();
            if at_gap && !(single_period && is_abbreviation(chars, s, i)) {
                spans.push((s, j + 1));
                start = None;
            }
            i = j + 1;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        let e = trim_end(chars, s, n);
        if e > s {
            spans.push((s, e));
        }
    }
    spans
}

fn paragraph_spans(chars: &[char]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    let mut line_start = 0;
    let n = chars.len();
    while line_start <= n {
        let line_end = chars[line_start..]
            .iter()
            .position(|c| *c == '\n')
            .map_or(n, |p| line_start + p);
        let line = &chars[line_start..line_end];
        match line.iter().position(|c| !c.is_whitespace()) {
            None => {
                if let Some(span) = current.take() {
                    spans.push(span);
                }
            }
            Some(first) => {
                let end = trim_end(chars, line_start, line_end);
                match current.as_mut() {
                    Some(span) => span.1 = end,
                    None => current = Some((line_start + first, end)),
                }
            }
        }
        line_start = line_end + 1;
    }
    if let Some(span) = current {
        spans.push(span);
    }
    spans
}
