//! Unit-cost Levenshtein distance and alignment over token sequences.
//!
//! Three routes to the same number:
//!
//! * [`distance_dp`]: the two-row Wagner–Fischer recurrence, the reference.
//! * [`distance_bit_parallel`]: Myers' bit-vector algorithm in Hyyrö's
//!   block formulation, `O(⌈m/64⌉·n)` words.
//! * [`distance`]: strips the common prefix and suffix, then runs the
//!   bit-parallel kernel. This is what the rest of the crate calls.
//!
//! [`script`] produces an explicit alignment. Common prefix and suffix are
//! matched first; the remaining middle is aligned with a full cost matrix
//! and a backtrace that prefers match, then substitute, then delete, then
//! insert. Middles larger than [`FULL_MATRIX_CELLS`] fall back to
//! Hirschberg's linear-space divide and conquer.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segment::{Granularity, TokenSequence};

/// Largest `(m+1)·(n+1)` aligned with a stored cost matrix.
pub const FULL_MATRIX_CELLS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Match,
    Substitute,
    Insert,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOp {
    pub kind: OpKind,
    pub a_index: Option<usize>,
    pub b_index: Option<usize>,
}

impl EditOp {
    pub fn matched(i: usize, j: usize) -> Self {
        EditOp {
            kind: OpKind::Match,
            a_index: Some(i),
            b_index: Some(j),
        }
    }

    pub fn substitute(i: usize, j: usize) -> Self {
        EditOp {
            kind: OpKind::Substitute,
            a_index: Some(i),
            b_index: Some(j),
        }
    }

    pub fn insert(j: usize) -> Self {
        EditOp {
            kind: OpKind::Insert,
            a_index: None,
            b_index: Some(j),
        }
    }

    pub fn delete(i: usize) -> Self {
        EditOp {
            kind: OpKind::Delete,
            a_index: Some(i),
            b_index: None,
        }
    }

    pub fn is_edit(&self) -> bool {
        self.kind != OpKind::Match
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
    pub cost: usize,
}

impl EditScript {
    /// Rebuilds `b` from `a` by replaying the ops.
    pub fn apply<T: Clone>(&self, a: &[T], b: &[T]) -> Vec<T> {
        self.ops
            .iter()
            .filter_map(|op| match op.kind {
                OpKind::Match => Some(a[op.a_index.expect("match has a_index")].clone()),
                OpKind::Substitute | OpKind::Insert => {
                    Some(b[op.b_index.expect("op has b_index")].clone())
                }
                OpKind::Delete => None,
            })
            .collect()
    }
}

/// The binary change sequence of an alignment: one bit per column, set
/// where the column is not a match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditMask {
    pub bits: Vec<bool>,
    pub level: Granularity,
}

impl EditMask {
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Lengths of the maximal runs of set bits, left to right.
    pub fn runs(&self) -> Vec<usize> {
        run_lengths(&self.bits)
    }

    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|b| if *b { '1' } else { '0' })
            .collect()
    }
}

pub fn run_lengths(bits: &[bool]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut current = 0;
    for &b in bits {
        if b {
            current += 1;
        } else if current > 0 {
            runs.push(current);
            current = 0;
        }
    }
    if current > 0 {
        runs.push(current);
    }
    runs
}

fn common_affixes<T: PartialEq>(a: &[T], b: &[T]) -> (usize, usize) {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..]
        .iter()
        .rev()
        .zip(b[prefix..].iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    (prefix, suffix)
}

/// Two-row Wagner–Fischer recurrence.
pub fn distance_dp<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Advances one 64-row block by one text column. `hin` is the horizontal
/// delta entering from the block above; returns the delta at `high`.
#[inline]
fn advance_block(pv: &mut u64, mv: &mut u64, eq: u64, hin: i32, high: u64) -> i32 {
    let mut eq = eq;
    let xv = eq | *mv;
    if hin < 0 {
        eq |= 1;
    }
    let xh = (((eq & *pv).wrapping_add(*pv)) ^ *pv) | eq;
    let mut ph = *mv | !(xh | *pv);
    let mut mh = *pv & xh;
    let hout = if ph & high != 0 {
        1
    } else if mh & high != 0 {
        -1
    } else {
        0
    };
    ph <<= 1;
    mh <<= 1;
    if hin < 0 {
        mh |= 1;
    } else if hin > 0 {
        ph |= 1;
    }
    *pv = mh | !(xv | ph);
    *mv = ph & xv;
    hout
}

/// Bit-parallel global edit distance, no affix stripping.
pub fn distance_bit_parallel<T: Eq + Hash>(a: &[T], b: &[T]) -> usize {
    let (pattern, text) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let m = pattern.len();
    if m == 0 {
        return text.len();
    }
    let blocks = m.div_ceil(64);
    let mut peq: HashMap<&T, Vec<u64>> = HashMap::new();
    for (i, sym) in pattern.iter().enumerate() {
        peq.entry(sym).or_insert_with(|| vec![0; blocks])[i / 64] |= 1u64 << (i % 64);
    }
    let zeros = vec![0u64; blocks];
    let last_high = 1u64 << ((m - 1) % 64);
    let mut pv = vec![!0u64; blocks];
    let mut mv = vec![0u64; blocks];
    let mut score = m as i64;
    for sym in text {
        let eq = peq.get(sym).unwrap_or(&zeros);
        // the first row of the DP table increases by one per column
        let mut carry = 1;
        for blk in 0..blocks {
            let high = if blk + 1 == blocks {
                last_high
            } else {
                1 << 63
            };
            carry = advance_block(&mut pv[blk], &mut mv[blk], eq[blk], carry, high);
        }
        score += i64::from(carry);
    }
    score as usize
}

/// Edit distance between two symbol sequences.
pub fn distance<T: Eq + Hash>(a: &[T], b: &[T]) -> usize {
    let (prefix, suffix) = common_affixes(a, b);
    distance_bit_parallel(&a[prefix..a.len() - suffix], &b[prefix..b.len() - suffix])
}

/// Character-level edit distance between two strings.
pub fn char_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    distance(&a, &b)
}

pub fn edit_distance(a: &TokenSequence, b: &TokenSequence) -> Result<usize> {
    if a.level != b.level {
        return Err(Error::LevelMismatch(a.level, b.level));
    }
    Ok(distance(&a.tokens, &b.tokens))
}

pub fn edit_script(a: &TokenSequence, b: &TokenSequence) -> Result<EditScript> {
    if a.level != b.level {
        return Err(Error::LevelMismatch(a.level, b.level));
    }
    Ok(script(&a.tokens, &b.tokens))
}

pub fn edit_mask(script: &EditScript, level: Granularity) -> EditMask {
    EditMask {
        bits: script.ops.iter().map(EditOp::is_edit).collect(),
        level,
    }
}

/// Minimal alignment of `a` onto `b`.
pub fn script<T: PartialEq>(a: &[T], b: &[T]) -> EditScript {
    script_with_limit(a, b, FULL_MATRIX_CELLS)
}

pub(crate) fn script_with_limit<T: PartialEq>(a: &[T], b: &[T], max_cells: usize) -> EditScript {
    let (prefix, suffix) = common_affixes(a, b);
    let mut ops: Vec<EditOp> = (0..prefix).map(|i| EditOp::matched(i, i)).collect();
    let mid_a = &a[prefix..a.len() - suffix];
    let mid_b = &b[prefix..b.len() - suffix];
    align(mid_a, mid_b, prefix, prefix, max_cells, &mut ops);
    let (ta, tb) = (a.len() - suffix, b.len() - suffix);
    ops.extend((0..suffix).map(|k| EditOp::matched(ta + k, tb + k)));
    let cost = ops.iter().filter(|op| op.is_edit()).count();
    EditScript { ops, cost }
}

fn align<T: PartialEq>(
    a: &[T],
    b: &[T],
    a_off: usize,
    b_off: usize,
    max_cells: usize,
    ops: &mut Vec<EditOp>,
) {
    if a.is_empty() {
        ops.extend((0..b.len()).map(|j| EditOp::insert(b_off + j)));
    } else if b.is_empty() {
        ops.extend((0..a.len()).map(|i| EditOp::delete(a_off + i)));
    } else if a.len() == 1 || (a.len() + 1).saturating_mul(b.len() + 1) <= max_cells {
        full_matrix(a, b, a_off, b_off, ops);
    } else {
        hirschberg(a, b, a_off, b_off, max_cells, ops);
    }
}

fn full_matrix<T: PartialEq>(a: &[T], b: &[T], a_off: usize, b_off: usize, ops: &mut Vec<EditOp>) {
    let (m, n) = (a.len(), b.len());
    let w = n + 1;
    let mut d = vec![0u32; (m + 1) * w];
    for (j, cell) in d[..w].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=m {
        d[i * w] = i as u32;
        for j in 1..=n {
            let sub = d[(i - 1) * w + j - 1] + u32::from(a[i - 1] != b[j - 1]);
            d[i * w + j] = sub.min(d[(i - 1) * w + j] + 1).min(d[i * w + j - 1] + 1);
        }
    }
    let mut rev = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 && a[i - 1] == b[j - 1] && d[(i - 1) * w + j - 1] == here {
            rev.push(EditOp::matched(a_off + i - 1, b_off + j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && d[(i - 1) * w + j - 1] + 1 == here {
            rev.push(EditOp::substitute(a_off + i - 1, b_off + j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && d[(i - 1) * w + j] + 1 == here {
            rev.push(EditOp::delete(a_off + i - 1));
            i -= 1;
        } else {
            rev.push(EditOp::insert(b_off + j - 1));
            j -= 1;
        }
    }
    ops.extend(rev.into_iter().rev());
}

/// Last row of the DP table for `a` against every prefix of `b`, walking
/// both sequences forwards or both backwards.
fn last_row<T: PartialEq>(a: &[T], b: &[T], backwards: bool) -> Vec<usize> {
    let n = b.len();
    let at = |i: usize| {
        if backwards {
            &a[a.len() - 1 - i]
        } else {
            &a[i]
        }
    };
    let bt = |j: usize| if backwards { &b[n - 1 - j] } else { &b[j] };
    let mut prev: Vec<usize> = (0..=n).collect();
    let mut cur = vec![0; n + 1];
    for i in 0..a.len() {
        cur[0] = i + 1;
        let x = at(i);
        for j in 0..n {
            let sub = prev[j] + usize::from(x != bt(j));
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev
}

fn hirschberg<T: PartialEq>(
    a: &[T],
    b: &[T],
    a_off: usize,
    b_off: usize,
    max_cells: usize,
    ops: &mut Vec<EditOp>,
) {
    let mid = a.len() / 2;
    let fwd = last_row(&a[..mid], b, false);
    let bwd = last_row(&a[mid..], b, true);
    let n = b.len();
    let split = (0..=n)
        .min_by_key(|&j| fwd[j] + bwd[n - j])
        .expect("non-empty range");
    align(&a[..mid], &b[..split], a_off, b_off, max_cells, ops);
    align(
        &a[mid..],
        &b[split..],
        a_off + mid,
        b_off + split,
        max_cells,
        ops,
    );
}
