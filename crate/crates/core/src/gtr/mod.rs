//! Geo-time re-ranking of retrieved candidates.
//!
//! Five rankings are built over the stage-1 candidate set:
//!
//! | feature  | base rank                       | adjustment                                   |
//! |----------|---------------------------------|----------------------------------------------|
//! | semantic | descending retrieval similarity | ÷ `w_s`                                      |
//! | category | descending snippet cross score  | ÷ `w_c`                                      |
//! | distance | ascending haversine km          | ÷ `beta_d` if km < `tau_d`                   |
//! | latitude | raw semantic rank               | ÷ `beta_phi` if km ≥ `tau_d` and Δφ < `tau_phi` |
//! | temporal | ascending day-of-year distance  | none                                         |
//!
//! Adjusted ranks stay real-valued and are fused with reciprocal rank fusion,
//! `Σ 1 / (rrf_k + r)`.

mod features;
mod fusion;
mod geo;
mod params;
mod rank;

use serde::{Deserialize, Serialize};

use crate::event::{Corpus, EventRecord};
use crate::providers::{Provider, ProviderError};
use crate::retrieval::{dense_retrieve, DenseIndex, RetrievalError, Retrieved};

pub use features::{
    category_ranking, distance_ranking, latitude_ranking, latitude_ranking_by_diff,
    semantic_ranking, temporal_ranking, FeatureRanking, RankEntry,
};
pub use fusion::{rrf_fuse, FusedEntry, RrfFusion};
pub use geo::{destination_point, haversine_km, latitude_diff, temporal_distance, EARTH_RADIUS_KM};
pub use params::{Feature, GtrParams, LatitudeMode};
pub use rank::{rank_ascending, rank_descending};

#[derive(Debug, thiserror::Error)]
pub enum GtrError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("rankings disagree on the candidate set: {0}")]
    DomainMismatch(String),
    #[error("unknown event id `{0}`")]
    UnknownEvent(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityDetail {
    pub raw: usize,
    pub adjusted: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceDetail {
    pub raw: usize,
    pub adjusted: f64,
    pub km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatitudeDetail {
    pub raw: usize,
    pub adjusted: f64,
    pub deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalDetail {
    pub raw: usize,
    pub days: u32,
}

/// Per-feature diagnostics; disabled features are absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureBreakdown {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semantic: Option<SimilarityDetail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<SimilarityDetail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceDetail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latitude: Option<LatitudeDetail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temporal: Option<TemporalDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedCandidate {
    pub id: String,
    pub rrf_score: f64,
    pub final_rank: usize,
    pub features: FeatureBreakdown,
}

/// Re-ranking output for one query. `candidates` holds every retrieved
/// event in final order; `reranked` is the top `n_rerank`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedResult {
    pub query_id: String,
    pub params: GtrParams,
    pub candidates: Vec<FusedCandidate>,
    pub reranked: Vec<String>,
}

impl FusedResult {
    pub fn ranked_ids(&self) -> Vec<String> {
        self.candidates.iter().map(|c| c.id.clone()).collect()
    }
}

/// Stage 1 plus stage 2 for one query.
pub fn gtr_rerank(
    query: &EventRecord,
    corpus: &Corpus,
    index: &DenseIndex,
    params: &GtrParams,
    provider: &Provider,
) -> Result<FusedResult, GtrError> {
    params.validate()?;
    let retrieved = dense_retrieve(query, index, index.spec(), params.n_retrieve, provider)?;
    rerank_candidates(query, corpus, &retrieved, params, provider)
}

/// Re-ranks an existing stage-1 result. The candidate set is never altered.
pub fn rerank_candidates(
    query: &EventRecord,
    corpus: &Corpus,
    retrieved: &Retrieved,
    params: &GtrParams,
    provider: &Provider,
) -> Result<FusedResult, GtrError> {
    params.validate()?;
    let candidates: Vec<&EventRecord> = retrieved
        .candidates
        .iter()
        .map(|c| {
            corpus
                .get(&c.id)
                .ok_or_else(|| GtrError::UnknownEvent(c.id.clone()))
        })
        .collect::<Result<_, _>>()?;
    let ids: Vec<&str> = candidates.iter().map(|e| e.id.as_str()).collect();

    let semantic = semantic_ranking(
        &retrieved.candidates,
        if params.is_enabled(Feature::Semantic) {
            params.w_s
        } else {
            1.0
        },
    );
    let distance = distance_ranking(
        query,
        &candidates,
        params.tau_d,
        params.beta_d,
        params.earth_radius_km,
    );
    let km: Vec<f64> = distance.entries.iter().map(|e| e.signal).collect();
    let dphi: Vec<f64> = candidates.iter().map(|z| latitude_diff(query, z)).collect();

    let mut rankings = Vec::with_capacity(5);
    for feature in &params.enabled_features {
        let ranking = match feature {
            Feature::Semantic => semantic.clone(),
            Feature::Category => category_ranking(query, &candidates, provider, params.w_c)?,
            Feature::Distance => distance.clone(),
            Feature::Latitude => match params.latitude_mode {
                LatitudeMode::SemanticSeed => latitude_ranking(
                    &retrieved.ranks(),
                    &km,
                    &dphi,
                    params.tau_d,
                    params.tau_phi,
                    params.beta_phi,
                ),
                LatitudeMode::DiffSort => latitude_ranking_by_diff(
                    &ids,
                    &km,
                    &dphi,
                    params.tau_d,
                    params.tau_phi,
                    params.beta_phi,
                ),
            },
            Feature::Temporal => temporal_ranking(query, &candidates),
        };
        rankings.push(ranking);
    }

    let fusion = rrf_fuse(&rankings, params.rrf_k, params.n_rerank)?;
    let find = |feature: Feature, id: &str| {
        rankings
            .iter()
            .find(|r| r.feature == feature)
            .and_then(|r| r.get(id))
            .cloned()
    };
    let fused = fusion
        .entries
        .into_iter()
        .map(|e| {
            let features = FeatureBreakdown {
                semantic: find(Feature::Semantic, &e.id).map(|r| SimilarityDetail {
                    raw: r.raw,
                    adjusted: r.adjusted,
                    score: r.signal,
                }),
                category: find(Feature::Category, &e.id).map(|r| SimilarityDetail {
                    raw: r.raw,
                    adjusted: r.adjusted,
                    score: r.signal,
                }),
                distance: find(Feature::Distance, &e.id).map(|r| DistanceDetail {
                    raw: r.raw,
                    adjusted: r.adjusted,
                    km: r.signal,
                }),
                latitude: find(Feature::Latitude, &e.id).map(|r| LatitudeDetail {
                    raw: r.raw,
                    adjusted: r.adjusted,
                    deg: r.signal,
                }),
                temporal: find(Feature::Temporal, &e.id).map(|r| TemporalDetail {
                    raw: r.raw,
                    days: r.signal as u32,
                }),
            };
            FusedCandidate {
                id: e.id,
                rrf_score: e.rrf_score,
                final_rank: e.final_rank,
                features,
            }
        })
        .collect();
    Ok(FusedResult {
        query_id: query.id.clone(),
        params: params.clone(),
        candidates: fused,
        reranked: fusion.reranked,
    })
}
