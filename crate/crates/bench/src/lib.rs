//! Deterministic inputs shared by the benchmarks.

use drafttrace::{simulate, VersionHistory, WriterKind, WriterProfile};

/// A text pair of roughly `len` characters each that differ in a few
/// scattered words, like consecutive drafts.
pub fn draft_pair(len: usize, seed: u64) -> (Vec<char>, Vec<char>) {
    let scale = (len / 60).max(2);
    let h = simulate(&WriterProfile::new(
        WriterKind::WordRewriter,
        6,
        scale,
        seed,
    ))
    .expect("feasible profile");
    let a = h.versions[0].text.chars().collect();
    let b = h.versions[5].text.chars().collect();
    (a, b)
}

pub fn history(kind: WriterKind, n_versions: usize, text_scale: usize) -> VersionHistory {
    simulate(&WriterProfile::new(kind, n_versions, text_scale, 7)).expect("feasible profile")
}
