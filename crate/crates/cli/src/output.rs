//! Plain-text writers. Every file starts with its provenance: a `#` line for
//! CSV, a `provenance` field for JSON, an XML comment for SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Provenance;

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(prov: &Provenance, header: &[&str]) -> Self {
        let mut buf = format!("# {}\n", prov.line());
        buf.push_str(&header.join(","));
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        let escaped: Vec<String> = fields.iter().map(|f| field(f)).collect();
        writeln!(self.buf, "{}", escaped.join(",")).unwrap();
    }

    pub fn write(self, path: &Path) -> Result<()> {
        write_text(path, &self.buf)
    }
}

fn field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Formats an optional number, leaving the cell empty when absent.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Serialises `body` (which must be a JSON object) with a leading
/// provenance field.
pub fn write_json<T: Serialize>(path: &Path, prov: &Provenance, body: &T) -> Result<()> {
    let mut doc = serde_json::Map::new();
    doc.insert("provenance".into(), json!(prov));
    match serde_json::to_value(body)? {
        Value::Object(map) => doc.extend(map),
        other => {
            doc.insert("data".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
    text.push('\n');
    write_text(path, &text)
}

/// Counts of `values` in `bins` equal-width bins over `[lo, hi]`; the last
/// bin is closed. Values outside the range are clamped into the end bins.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64, usize)> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        let k = if width > 0.0 {
            ((v - lo) / width).floor()
        } else {
            0.0
        };
        counts[(k.max(0.0) as usize).min(bins - 1)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_edges() {
        let h = histogram(&[0.0, 0.5, 0.99, 1.0, 1.5], 0.0, 1.0, 2);
        assert_eq!(h, vec![(0.0, 0.5, 1), (0.5, 1.0, 4)]);
    }

    #[test]
    fn csv_escaping() {
        assert_eq!(field("plain"), "plain");
        assert_eq!(field("a,b"), "\"a,b\"");
        assert_eq!(field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
