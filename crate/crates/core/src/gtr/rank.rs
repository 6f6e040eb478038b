//! Rank statistics with a total order: ties go to the smaller id.

use std::cmp::Ordering;

fn ranks_by<S: AsRef<str>>(values: &[(S, f64)], cmp: impl Fn(f64, f64) -> Ordering) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        cmp(values[a].1, values[b].1).then_with(|| values[a].0.as_ref().cmp(values[b].0.as_ref()))
    });
    let mut ranks = vec![0; values.len()];
    for (pos, idx) in order.into_iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    ranks
}

/// Highest value gets rank 1. Output is aligned with the input.
pub fn rank_descending<S: AsRef<str>>(scores: &[(S, f64)]) -> Vec<usize> {
    ranks_by(scores, |a, b| b.total_cmp(&a))
}

/// Smallest value gets rank 1. Output is aligned with the input.
pub fn rank_ascending<S: AsRef<str>>(values: &[(S, f64)]) -> Vec<usize> {
    ranks_by(values, |a, b| a.total_cmp(&b))
}
