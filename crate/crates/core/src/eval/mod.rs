//! Offline evaluation: metrics, run reports, weight grid search, feature
//! ablation and synthetic fixtures.

mod ablation;
mod experiment;
mod grid;
mod judgments;
pub mod metrics;
mod report;
pub mod synth;

pub use ablation::{ablation, Ablation, AblationRow, ABLATION_ORDER};
pub use experiment::EvalContext;
pub use grid::{grid_search_weights, params_for_weights, weight_grid, GridSearch, WeightGridPoint};
pub use judgments::Judgments;
pub use metrics::{hit_rate_at_k, mrr_at_k, ndcg_at_k, recall_at_k, Runs};
pub use report::{
    evaluate_run, metric_deltas, render_table, EvalReport, Metric, MetricValues, QueryBreakdown,
    QueryValues, DEFAULT_CUTOFFS,
};
pub use synth::{synth_corpus, synth_with, PlantedSignal, SynthConfig};

use crate::gtr::GtrError;
use crate::retrieval::RetrievalError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("relevant set is empty")]
    EmptyRelevant,
    #[error("no evaluable queries")]
    NoEvaluableQueries,
    #[error("unknown query id `{0}`")]
    UnknownQuery(String),
    #[error("grid step {0} does not divide 1 evenly")]
    InvalidStep(f64),
    #[error("ablation: {0}")]
    Ablation(String),
    #[error("judgments: {0}")]
    Judgments(String),
    #[error("synthetic corpus: {0}")]
    Synth(String),
    #[error(transparent)]
    Gtr(#[from] GtrError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
