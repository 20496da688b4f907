//! The writing cloud: every sentence ever written, placed in one global
//! positional coordinate system.
//!
//! Consecutive versions are aligned sentence by sentence. A matched
//! sentence keeps its column and its point; a substituted one keeps the
//! column but gets a new point born at the current version; an inserted one
//! opens a new column right after the column of the previous alignment
//! step, renumbering every later column (including in earlier polylines);
//! a deleted one leaves its column in place, no longer traversed.
//!
//! Edit counting: substitutions, insertions and deletions each add one edit
//! to their column, so the column counts sum to the total alignment cost.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::VersionHistory;
use crate::editdist::{edit_script, OpKind};
use crate::error::Result;
use crate::segment::{segment, Granularity};
use crate::stats::{mean_curve_with_band, GriddedCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CloudPoint {
    pub column: usize,
    pub birth_version: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WritingCloud {
    pub level: Granularity,
    pub n_columns: usize,
    /// Distinct points, sorted by column then birth.
    pub points: Vec<CloudPoint>,
    /// One polyline per version, left to right.
    pub polylines: Vec<Vec<CloudPoint>>,
    pub edit_counts: Vec<u64>,
}

impl WritingCloud {
    pub fn total_edits(&self) -> u64 {
        self.edit_counts.iter().sum()
    }

    pub fn n_versions(&self) -> usize {
        self.polylines.len()
    }
}

/// Builds the cloud from consecutive alignments at `level` (normally
/// sentences).
pub fn build_cloud(history: &VersionHistory, level: Granularity) -> Result<WritingCloud> {
    history.require_versions(2)?;
    let seqs: Vec<_> = history
        .versions
        .par_iter()
        .map(|v| segment(&v.text, level))
        .collect();

    // Columns are tracked by stable ids; `order` is their positional order.
    let mut order: Vec<usize> = (0..seqs[0].len()).collect();
    let mut counts: Vec<u64> = vec![0; seqs[0].len()];
    let mut current: Vec<(usize, usize)> = (0..seqs[0].len()).map(|id| (id, 0)).collect();
    let mut lines = Vec::with_capacity(seqs.len());
    lines.push(current.clone());

    for (t, pair) in seqs.windows(2).enumerate() {
        let t = t + 1;
        let script = edit_script(&pair[0], &pair[1])?;
        let mut next = Vec::with_capacity(pair[1].len());
        let mut anchor: Option<usize> = None;
        for op in &script.ops {
            match op.kind {
                OpKind::Match => {
                    let point = current[op.a_index.expect("match has a_index")];
                    next.push(point);
                    anchor = Some(point.0);
                }
                OpKind::Substitute => {
                    let id = current[op.a_index.expect("substitute has a_index")].0;
                    counts[id] += 1;
                    next.push((id, t));
                    anchor = Some(id);
                }
                OpKind::Delete => {
                    let id = current[op.a_index.expect("delete has a_index")].0;
                    counts[id] += 1;
                    anchor = Some(id);
                }
                OpKind::Insert => {
                    let id = counts.len();
                    counts.push(1);
                    let at = match anchor {
                        Some(a) => {
                            order
                                .iter()
                                .position(|c| *c == a)
                                .expect("anchor is placed")
                                + 1
                        }
                        None => 0,
                    };
                    order.insert(at, id);
                    next.push((id, t));
                    anchor = Some(id);
                }
            }
        }
        current = next;
        lines.push(current.clone());
    }

    let mut column_of = vec![0; order.len()];
    for (pos, id) in order.iter().enumerate() {
        column_of[*id] = pos;
    }
    let polylines: Vec<Vec<CloudPoint>> = lines
        .into_iter()
        .map(|line| {
            line.into_iter()
                .map(|(id, birth)| CloudPoint {
                    column: column_of[id],
                    birth_version: birth,
                })
                .collect()
        })
        .collect();
    let points: BTreeSet<CloudPoint> = polylines.iter().flatten().copied().collect();
    let mut edit_counts = vec![0; order.len()];
    for (id, c) in counts.into_iter().enumerate() {
        edit_counts[column_of[id]] = c;
    }
    Ok(WritingCloud {
        level,
        n_columns: order.len(),
        points: points.into_iter().collect(),
        polylines,
        edit_counts,
    })
}

/// `(column / (n_columns - 1), edits)` per column; a single column sits at 0.
pub fn edit_profile(cloud: &WritingCloud) -> Vec<(f64, f64)> {
    let denom = cloud.n_columns.saturating_sub(1).max(1) as f64;
    cloud
        .edit_counts
        .iter()
        .enumerate()
        .map(|(c, n)| (c as f64 / denom, *n as f64))
        .collect()
}

/// Averages per-author profiles on a common grid with a bootstrap band.
pub fn mean_edit_profile(
    profiles: &[Vec<(f64, f64)>],
    grid_points: usize,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<GriddedCurve> {
    let split: Vec<(Vec<f64>, Vec<f64>)> =
        profiles.iter().map(|p| p.iter().copied().unzip()).collect();
    mean_curve_with_band(&split, grid_points, n_boot, level, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudSegment {
    pub from: CloudPoint,
    pub to: CloudPoint,
    /// Number of version polylines that traverse this segment.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudPlotData {
    pub n_columns: usize,
    pub n_versions: usize,
    pub polylines: Vec<Vec<CloudPoint>>,
    pub segments: Vec<CloudSegment>,
}

pub fn cloud_plot_data(cloud: &WritingCloud) -> CloudPlotData {
    let mut mult: BTreeMap<(CloudPoint, CloudPoint), usize> = BTreeMap::new();
    for line in &cloud.polylines {
        for w in line.windows(2) {
            *mult.entry((w[0], w[1])).or_insert(0) += 1;
        }
    }
    CloudPlotData {
        n_columns: cloud.n_columns,
        n_versions: cloud.n_versions(),
        polylines: cloud.polylines.clone(),
        segments: mult
            .into_iter()
            .map(|((from, to), multiplicity)| CloudSegment {
                from,
                to,
                multiplicity,
            })
            .collect(),
    }
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 600.0;
const SVG_MARGIN: f64 = 50.0;

impl CloudPlotData {
    /// `version,column,birth_version`, one row per traversed point.
    pub fn points_csv(&self) -> String {
        let mut out = String::from("version,column,birth_version\n");
        for (v, line) in self.polylines.iter().enumerate() {
            for p in line {
                writeln!(out, "{v},{},{}", p.column, p.birth_version).unwrap();
            }
        }
        out
    }

    pub fn segments_csv(&self) -> String {
        let mut out = String::from("from_column,from_birth,to_column,to_birth,multiplicity\n");
        for s in &self.segments {
            writeln!(
                out,
                "{},{},{},{},{}",
                s.from.column,
                s.from.birth_version,
                s.to.column,
                s.to.birth_version,
                s.multiplicity
            )
            .unwrap();
        }
        out
    }

    fn x(&self, column: usize) -> f64 {
        let span = self.n_columns.saturating_sub(1).max(1) as f64;
        SVG_MARGIN + column as f64 / span * (SVG_WIDTH - 2.0 * SVG_MARGIN)
    }

    fn y(&self, birth: usize) -> f64 {
        let span = self.n_versions.saturating_sub(1).max(1) as f64;
        SVG_HEIGHT - SVG_MARGIN - birth as f64 / span * (SVG_HEIGHT - 2.0 * SVG_MARGIN)
    }

    /// Standalone SVG: segment opacity grows with traversal multiplicity.
    pub fn to_svg(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
        )
        .unwrap();
        if let Some(c) = comment {
            writeln!(out, "<!-- {} -->", c.replace("--", "- -")).unwrap();
        }
        let (left, right) = (SVG_MARGIN, SVG_WIDTH - SVG_MARGIN);
        let (top, bottom) = (SVG_MARGIN, SVG_HEIGHT - SVG_MARGIN);
        writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            out,
            r##"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="#444" stroke-width="1"/>"##
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">Sentence column</text>"#,
            SVG_WIDTH / 2.0,
            SVG_HEIGHT - 15.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="15" y="{:.1}" font-size="14" text-anchor="middle" transform="rotate(-90 15 {:.1})">Time of edit (version)</text>"#,
            SVG_HEIGHT / 2.0,
            SVG_HEIGHT / 2.0
        )
        .unwrap();
        let max_mult = self
            .segments
            .iter()
            .map(|s| s.multiplicity)
            .max()
            .unwrap_or(1) as f64;
        writeln!(
            out,
            r##"<g stroke="#1f3a93" stroke-width="1.5" fill="none">"##
        )
        .unwrap();
        for s in &self.segments {
            let opacity = 0.1 + 0.9 * s.multiplicity as f64 / max_mult;
            writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke-opacity="{:.3}"/>"#,
                self.x(s.from.column),
                self.y(s.from.birth_version),
                self.x(s.to.column),
                self.y(s.to.birth_version),
                opacity
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
        let points: BTreeSet<CloudPoint> = self.polylines.iter().flatten().copied().collect();
        writeln!(out, r##"<g fill="#c0392b">"##).unwrap();
        for p in points {
            writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#,
                self.x(p.column),
                self.y(p.birth_version)
            )
            .unwrap();
        }
        writeln!(out, "</g>\n</svg>").unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::editdist::distance;

    fn cloud(texts: &[&str]) -> WritingCloud {
        build_cloud(
            &VersionHistory::from_texts("t", texts),
            Granularity::Sentence,
        )
        .unwrap()
    }

    fn pt(column: usize, birth_version: usize) -> CloudPoint {
        CloudPoint {
            column,
            birth_version,
        }
    }

    #[test]
    fn substitution_keeps_column() {
        let c = cloud(&["A. B.", "A. C."]);
        assert_eq!(c.n_columns, 2);
        assert_eq!(c.edit_counts, vec![0, 1]);
        assert!(c.points.contains(&pt(1, 0)) && c.points.contains(&pt(1, 1)));
        assert_eq!(c.polylines[1], vec![pt(0, 0), pt(1, 1)]);
    }

    #[test]
    fn insertion_opens_a_middle_column() {
        let c = cloud(&["A. B.", "A. X. B."]);
        assert_eq!(c.n_columns, 3);
        assert_eq!(c.edit_counts, vec![0, 1, 0]);
        assert_eq!(c.polylines[0], vec![pt(0, 0), pt(2, 0)]);
        assert_eq!(c.polylines[1], vec![pt(0, 0), pt(1, 1), pt(2, 0)]);
    }

    #[test]
    fn retroactive_renumbering_and_deletion() {
        let c = cloud(&["A. B. C.", "A. C.", "X. A. C.", "X. A. Y. C."]);
        // B deleted at v1 keeps its column; X opens column 0; Y goes after A
        assert_eq!(c.n_columns, 5);
        assert_eq!(c.polylines[0], vec![pt(1, 0), pt(3, 0), pt(4, 0)]);
        assert_eq!(c.polylines[3], vec![pt(0, 2), pt(1, 0), pt(2, 3), pt(4, 0)]);
        assert_eq!(c.edit_counts, vec![1, 0, 1, 1, 0]);
    }

    #[test]
    fn counts_sum_to_alignment_cost_and_polylines_increase() {
        let texts = [
            "One here. Two here. Three here.",
            "One here. Two changed. Three here. Four.",
            "Zero. One here. Four.",
            "Zero. One here. Four. Five. Six.",
            "Six. Zero. One again.",
        ];
        let c = cloud(&texts);
        let seqs: Vec<_> = texts
            .iter()
            .map(|t| segment(t, Granularity::Sentence))
            .collect();
        let cost: usize = seqs
            .windows(2)
            .map(|w| distance(&w[0].tokens, &w[1].tokens))
            .sum();
        assert_eq!(c.total_edits() as usize, cost);
        for line in &c.polylines {
            assert!(line.windows(2).all(|w| w[0].column < w[1].column));
        }
        for (v, line) in c.polylines.iter().enumerate() {
            assert!(line.iter().all(|p| p.birth_version <= v));
        }
        assert_eq!(
            c.polylines.last().unwrap().len(),
            seqs.last().unwrap().len()
        );
        assert_eq!(c, cloud(&texts));
    }

    #[test]
    fn profile_examples() {
        let c = cloud(&["A. B.", "A. X. B."]);
        assert_eq!(edit_profile(&c), vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]);

        let single = cloud(&["A.", "B."]);
        assert_eq!(edit_profile(&single), vec![(0.0, 1.0)]);

        let p = edit_profile(&c);
        let mean = mean_edit_profile(&[p.clone(), p], 101, 200, 0.995, 1).unwrap();
        assert_eq!(mean.mean[50], 1.0);
        assert_eq!(mean.mean[0], 0.0);
        assert!(mean.ci_low.iter().zip(&mean.ci_high).all(|(l, h)| l == h));
    }

    #[test]
    fn plot_data_multiplicities() {
        let c = cloud(&["A. B. C.", "A. B. D."]);
        let d = cloud_plot_data(&c);
        assert_eq!(d.polylines.len(), 2);
        let shared = d
            .segments
            .iter()
            .find(|s| s.from == pt(0, 0) && s.to == pt(1, 0))
            .unwrap();
        assert_eq!(shared.multiplicity, 2);

        let c = cloud(&["A. B.", "C. D.", "E. F."]);
        assert!(cloud_plot_data(&c)
            .segments
            .iter()
            .all(|s| s.multiplicity == 1));
    }

    #[test]
    fn csv_layout() {
        let d = cloud_plot_data(&cloud(&["A. B.", "A. C."]));
        assert_eq!(
            d.points_csv(),
            "version,column,birth_version\n0,0,0\n0,1,0\n1,0,0\n1,1,1\n"
        );
    }
}
