use serde::{Deserialize, Serialize};

use super::geo::{haversine_km, temporal_distance};
use super::rank::{rank_ascending, rank_descending};
use super::Feature;
use crate::event::EventRecord;
use crate::providers::{Provider, ProviderError};
use crate::retrieval::ScoredCandidate;

/// One candidate's standing under a single feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub id: String,
    /// Permutation rank before any weight or booster.
    pub raw: usize,
    /// Rank value fed to fusion (raw, or raw divided by a weight/booster).
    pub adjusted: f64,
    /// The underlying measurement: similarity, km, degrees or days.
    pub signal: f64,
}

/// A feature's ranking over the retrieved candidates, aligned with their
/// retrieval order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub feature: Feature,
    pub entries: Vec<RankEntry>,
}

impl FeatureRanking {
    fn from_parts(
        feature: Feature,
        ids: &[&str],
        raw: Vec<usize>,
        signal: &[f64],
        adjust: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let entries = ids
            .iter()
            .zip(raw)
            .zip(signal)
            .enumerate()
            .map(|(i, ((id, r), s))| RankEntry {
                id: id.to_string(),
                raw: r,
                adjusted: adjust(i, r),
                signal: *s,
            })
            .collect();
        Self { feature, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&RankEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

fn ids_of<'a>(candidates: &'a [&EventRecord]) -> Vec<&'a str> {
    candidates.iter().map(|e| e.id.as_str()).collect()
}

/// Descending rank of the retrieval similarities, divided by `w_s`.
pub fn semantic_ranking(sim: &[ScoredCandidate], w_s: f64) -> FeatureRanking {
    let pairs: Vec<(&str, f64)> = sim.iter().map(|c| (c.id.as_str(), c.score)).collect();
    let ids: Vec<&str> = pairs.iter().map(|p| p.0).collect();
    let signal: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    FeatureRanking::from_parts(
        Feature::Semantic,
        &ids,
        rank_descending(&pairs),
        &signal,
        |_, r| r as f64 / w_s,
    )
}

/// Cross-scores the query's category snippet against each candidate's,
/// ranks descending and divides by `w_c`. A pair where either snippet is
/// empty scores 0.
pub fn category_ranking(
    query: &EventRecord,
    candidates: &[&EventRecord],
    provider: &Provider,
    w_c: f64,
) -> Result<FeatureRanking, ProviderError> {
    let q = provider.snippet_for(query)?;
    let signal = candidates
        .iter()
        .map(|z| {
            let s = provider.snippet_for(z)?;
            if q.rendered().is_empty() || s.rendered().is_empty() {
                Ok(0.0)
            } else {
                provider.cross_score(q.rendered(), s.rendered())
            }
        })
        .collect::<Result<Vec<f64>, ProviderError>>()?;
    let ids = ids_of(candidates);
    let pairs: Vec<(&str, f64)> = ids.iter().copied().zip(signal.iter().copied()).collect();
    Ok(FeatureRanking::from_parts(
        Feature::Category,
        &ids,
        rank_descending(&pairs),
        &signal,
        |_, r| r as f64 / w_c,
    ))
}

/// Ascending rank of haversine distance; candidates strictly closer than
/// `tau_d` have their rank divided by `beta_d`.
pub fn distance_ranking(
    query: &EventRecord,
    candidates: &[&EventRecord],
    tau_d: f64,
    beta_d: f64,
    radius_km: f64,
) -> FeatureRanking {
    let km: Vec<f64> = candidates
        .iter()
        .map(|z| haversine_km(query.point(), z.point(), radius_km))
        .collect();
    let ids = ids_of(candidates);
    let pairs: Vec<(&str, f64)> = ids.iter().copied().zip(km.iter().copied()).collect();
    FeatureRanking::from_parts(
        Feature::Distance,
        &ids,
        rank_ascending(&pairs),
        &km,
        |i, r| {
            if km[i] < tau_d {
                r as f64 / beta_d
            } else {
                r as f64
            }
        },
    )
}

/// Seeds from the raw semantic permutation and divides by `beta_phi` only
/// for candidates at least `tau_d` away whose |Δlatitude| is below `tau_phi`.
pub fn latitude_ranking(
    semantic_raw: &[(String, usize)],
    distances_km: &[f64],
    latitude_diffs: &[f64],
    tau_d: f64,
    tau_phi: f64,
    beta_phi: f64,
) -> FeatureRanking {
    let ids: Vec<&str> = semantic_raw.iter().map(|(id, _)| id.as_str()).collect();
    let raw: Vec<usize> = semantic_raw.iter().map(|(_, r)| *r).collect();
    FeatureRanking::from_parts(Feature::Latitude, &ids, raw, latitude_diffs, |i, r| {
        latitude_adjust(
            r,
            distances_km[i],
            latitude_diffs[i],
            tau_d,
            tau_phi,
            beta_phi,
        )
    })
}

/// Variant that seeds from the ascending rank of |Δlatitude| instead of the
/// semantic permutation.
pub fn latitude_ranking_by_diff(
    ids: &[&str],
    distances_km: &[f64],
    latitude_diffs: &[f64],
    tau_d: f64,
    tau_phi: f64,
    beta_phi: f64,
) -> FeatureRanking {
    let pairs: Vec<(&str, f64)> = ids
        .iter()
        .copied()
        .zip(latitude_diffs.iter().copied())
        .collect();
    FeatureRanking::from_parts(
        Feature::Latitude,
        ids,
        rank_ascending(&pairs),
        latitude_diffs,
        |i, r| {
            latitude_adjust(
                r,
                distances_km[i],
                latitude_diffs[i],
                tau_d,
                tau_phi,
                beta_phi,
            )
        },
    )
}

fn latitude_adjust(raw: usize, km: f64, dphi: f64, tau_d: f64, tau_phi: f64, beta_phi: f64) -> f64 {
    if km >= tau_d && dphi.abs() < tau_phi {
        raw as f64 / beta_phi
    } else {
        raw as f64
    }
}

/// Ascending rank of cyclic day-of-year distance; no weight or booster.
pub fn temporal_ranking(query: &EventRecord, candidates: &[&EventRecord]) -> FeatureRanking {
    let days: Vec<f64> = candidates
        .iter()
        .map(|z| f64::from(temporal_distance(query.date, z.date)))
        .collect();
    let ids = ids_of(candidates);
    let pairs: Vec<(&str, f64)> = ids.iter().copied().zip(days.iter().copied()).collect();
    FeatureRanking::from_parts(
        Feature::Temporal,
        &ids,
        rank_ascending(&pairs),
        &days,
        |_, r| r as f64,
    )
}
