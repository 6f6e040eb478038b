use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::rank::rank_descending;
use super::{FeatureRanking, GtrError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedEntry {
    pub id: String,
    pub rrf_score: f64,
    pub final_rank: usize,
}

/// Fused scores ordered by final rank, plus the top `n_rerank` ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrfFusion {
    pub entries: Vec<FusedEntry>,
    pub reranked: Vec<String>,
}

/// `score(z) = Σ 1 / (rrf_k + adjusted_rank(z))` over the given rankings.
///
/// Every ranking must cover the same candidate ids.
pub fn rrf_fuse(
    rankings: &[FeatureRanking],
    rrf_k: f64,
    n_rerank: usize,
) -> Result<RrfFusion, GtrError> {
    if !(rrf_k.is_finite() && rrf_k > 0.0) {
        return Err(GtrError::InvalidParams(format!(
            "rrf_k must be positive, got {rrf_k}"
        )));
    }
    let Some(first) = rankings.first() else {
        return Ok(RrfFusion {
            entries: Vec::new(),
            reranked: Vec::new(),
        });
    };
    let lookups: Vec<HashMap<&str, f64>> = rankings
        .iter()
        .map(|r| {
            r.entries
                .iter()
                .map(|e| (e.id.as_str(), e.adjusted))
                .collect()
        })
        .collect();
    let n = first.entries.len();
    for (ranking, lookup) in rankings.iter().zip(&lookups) {
        if ranking.entries.len() != n || lookup.len() != n {
            return Err(GtrError::DomainMismatch(format!(
                "{} ranking covers {} distinct candidates, expected {n}",
                ranking.feature,
                lookup.len()
            )));
        }
        if let Some(e) = first
            .entries
            .iter()
            .find(|e| !lookup.contains_key(e.id.as_str()))
        {
            return Err(GtrError::DomainMismatch(format!(
                "{} ranking lacks candidate `{}`",
                ranking.feature, e.id
            )));
        }
    }
    // Summed in ranking order so scores are reproducible bit for bit.
    let scores: Vec<(&str, f64)> = first
        .entries
        .iter()
        .map(|e| {
            let id = e.id.as_str();
            (id, lookups.iter().map(|l| 1.0 / (rrf_k + l[id])).sum())
        })
        .collect();
    let ranks = rank_descending(&scores);
    let mut entries: Vec<FusedEntry> = scores
        .iter()
        .zip(ranks)
        .map(|((id, s), r)| FusedEntry {
            id: id.to_string(),
            rrf_score: *s,
            final_rank: r,
        })
        .collect();
    entries.sort_by_key(|e| e.final_rank);
    let reranked = entries
        .iter()
        .take(n_rerank)
        .map(|e| e.id.clone())
        .collect();
    Ok(RrfFusion { entries, reranked })
}
