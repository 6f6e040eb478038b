//! Binary-relevance IR metrics. All values are fractions in [0, 1].

use std::collections::{BTreeMap, BTreeSet};

use super::{EvalError, Judgments};

fn top_k(ranked: &[String], k: usize) -> &[String] {
    &ranked[..k.min(ranked.len())]
}

/// |top-k ∩ relevant| / |relevant|.
pub fn recall_at_k(
    ranked: &[String],
    relevant: &BTreeSet<String>,
    k: usize,
) -> Result<f64, EvalError> {
    if relevant.is_empty() {
        return Err(EvalError::EmptyRelevant);
    }
    let hits = top_k(ranked, k)
        .iter()
        .filter(|id| relevant.contains(*id))
        .count();
    Ok(hits as f64 / relevant.len() as f64)
}

/// DCG over the top k with gain 1 per relevant id and discount log2(i + 1),
/// normalized by the DCG of min(k, |relevant|) leading hits.
pub fn ndcg_at_k(
    ranked: &[String],
    relevant: &BTreeSet<String>,
    k: usize,
) -> Result<f64, EvalError> {
    if relevant.is_empty() {
        return Err(EvalError::EmptyRelevant);
    }
    let dcg: f64 = top_k(ranked, k)
        .iter()
        .enumerate()
        .filter(|(_, id)| relevant.contains(*id))
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .fold(0.0, |acc, g| acc + g);
    let ideal: f64 = (0..k.min(relevant.len()))
        .map(|i| 1.0 / ((i + 2) as f64).log2())
        .sum();
    Ok(if ideal == 0.0 { 0.0 } else { dcg / ideal })
}

/// 1 if any relevant id is in the top k.
pub fn hit_at_k(ranked: &[String], relevant: &BTreeSet<String>, k: usize) -> bool {
    top_k(ranked, k).iter().any(|id| relevant.contains(id))
}

/// 1 / (1-based position of the first relevant id in the top k), or 0.
pub fn reciprocal_rank_at_k(ranked: &[String], relevant: &BTreeSet<String>, k: usize) -> f64 {
    top_k(ranked, k)
        .iter()
        .position(|id| relevant.contains(id))
        .map_or(0.0, |p| 1.0 / (p + 1) as f64)
}

/// Per-query rankings keyed by query id.
pub type Runs = BTreeMap<String, Vec<String>>;

fn evaluable<'a>(
    runs: &'a Runs,
    judgments: &'a Judgments,
) -> Vec<(&'a [String], &'a BTreeSet<String>)> {
    judgments
        .iter()
        .filter(|(_, rel)| !rel.is_empty())
        .map(|(q, rel)| (runs.get(q).map_or(&[][..], Vec::as_slice), rel))
        .collect()
}

/// Fraction of judged queries with at least one relevant id in the top k.
pub fn hit_rate_at_k(runs: &Runs, judgments: &Judgments, k: usize) -> Result<f64, EvalError> {
    let queries = evaluable(runs, judgments);
    if queries.is_empty() {
        return Err(EvalError::NoEvaluableQueries);
    }
    let hits = queries
        .iter()
        .filter(|(ranked, rel)| hit_at_k(ranked, rel, k))
        .count();
    Ok(hits as f64 / queries.len() as f64)
}

/// Mean reciprocal rank over judged queries, cut at k.
pub fn mrr_at_k(runs: &Runs, judgments: &Judgments, k: usize) -> Result<f64, EvalError> {
    let queries = evaluable(runs, judgments);
    if queries.is_empty() {
        return Err(EvalError::NoEvaluableQueries);
    }
    let total: f64 = queries
        .iter()
        .map(|(ranked, rel)| reciprocal_rank_at_k(ranked, rel, k))
        .sum();
    Ok(total / queries.len() as f64)
}
