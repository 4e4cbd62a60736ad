//! Deterministic descending orderings of scored hypotheses.
//!
//! Scores that agree to within [`TIE_RTOL`] (relative) are treated as tied and
//! ordered by ascending hypothesis index. Two routes computing the same
//! quantity with different floating-point operation orders therefore produce
//! the same ranking.

use alloc::vec::Vec;
use core::cmp::Ordering;

/// Relative tolerance under which two scores are considered tied.
pub const TIE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub hypothesis: usize,
    pub score: f64,
}

#[inline]
pub fn nearly_equal(a: f64, b: f64, rtol: f64) -> bool {
    let scale = if a.abs() > b.abs() { a.abs() } else { b.abs() };
    (a - b).abs() <= rtol * scale
}

/// Sorts descending by score; runs of near-equal scores are reordered by index.
pub fn rank_descending(mut items: Vec<Scored>) -> Vec<Scored> {
    items.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.hypothesis.cmp(&b.hypothesis))
    });
    let mut start = 0;
    while start < items.len() {
        let mut end = start + 1;
        while end < items.len() && nearly_equal(items[end - 1].score, items[end].score, TIE_RTOL) {
            end += 1;
        }
        if end - start > 1 {
            items[start..end].sort_by_key(|s| s.hypothesis);
        }
        start = end;
    }
    items
}

/// Three-way comparison with a relative tie band: `Greater` means `a` is
/// strictly preferred.
#[inline]
pub fn compare_with_tolerance(a: f64, b: f64, rtol: f64) -> Ordering {
    if nearly_equal(a, b, rtol) {
        Ordering::Equal
    } else if a > b {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}
