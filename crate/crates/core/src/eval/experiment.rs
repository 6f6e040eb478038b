use std::collections::BTreeMap;

use rayon::prelude::*;

use super::metrics::Runs;
use super::report::{evaluate_run, EvalReport};
use super::{EvalError, Judgments};
use crate::event::{build_structured_text, Corpus, SegmentSpec};
use crate::gtr::{rerank_candidates, FusedResult, GtrParams};
use crate::providers::Provider;
use crate::retrieval::{dense_retrieve, tokenize, Bm25Index, Bm25Params, DenseIndex, Retrieved};

/// Stage-1 results for every evaluable query, computed once and shared by
/// every re-ranking configuration.
pub struct EvalContext<'a> {
    pub corpus: &'a Corpus,
    pub judgments: &'a Judgments,
    pub provider: &'a Provider,
    pub cutoffs: Vec<usize>,
    retrieved: BTreeMap<String, Retrieved>,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        corpus: &'a Corpus,
        judgments: &'a Judgments,
        index: &DenseIndex,
        provider: &'a Provider,
        n_retrieve: usize,
        cutoffs: &[usize],
    ) -> Result<Self, EvalError> {
        let queries = judgments.evaluable_queries();
        if queries.is_empty() {
            return Err(EvalError::NoEvaluableQueries);
        }
        let retrieved = queries
            .par_iter()
            .map(|q| {
                let query = corpus
                    .get(q)
                    .ok_or_else(|| EvalError::UnknownQuery(q.clone()))?;
                Ok((
                    q.clone(),
                    dense_retrieve(query, index, index.spec(), n_retrieve, provider)?,
                ))
            })
            .collect::<Result<Vec<_>, EvalError>>()?
            .into_iter()
            .collect();
        Ok(Self {
            corpus,
            judgments,
            provider,
            cutoffs: cutoffs.to_vec(),
            retrieved,
        })
    }

    pub fn retrieved(&self) -> &BTreeMap<String, Retrieved> {
        &self.retrieved
    }

    pub fn dense_runs(&self) -> Runs {
        self.retrieved
            .iter()
            .map(|(q, r)| (q.clone(), r.ids()))
            .collect()
    }

    /// Re-ranks every query's stage-1 candidates with `params`.
    pub fn rerank_all(
        &self,
        params: &GtrParams,
    ) -> Result<BTreeMap<String, FusedResult>, EvalError> {
        params.validate()?;
        let results = self
            .retrieved
            .par_iter()
            .map(|(q, retrieved)| {
                let query = self
                    .corpus
                    .get(q)
                    .ok_or_else(|| EvalError::UnknownQuery(q.clone()))?;
                Ok((
                    q.clone(),
                    rerank_candidates(query, self.corpus, retrieved, params, self.provider)?,
                ))
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        Ok(results.into_iter().collect())
    }

    /// Full fused order per query, so cutoffs beyond `n_rerank` still see
    /// every retrieved candidate.
    pub fn gtr_runs(&self, params: &GtrParams) -> Result<Runs, EvalError> {
        Ok(self
            .rerank_all(params)?
            .into_iter()
            .map(|(q, r)| (q, r.ranked_ids()))
            .collect())
    }

    pub fn evaluate_dense(&self) -> Result<EvalReport, EvalError> {
        evaluate_run(&self.dense_runs(), self.judgments, &self.cutoffs)
    }

    pub fn evaluate_gtr(&self, params: &GtrParams) -> Result<EvalReport, EvalError> {
        evaluate_run(&self.gtr_runs(params)?, self.judgments, &self.cutoffs)
    }

    /// Lexical baseline over the same structured texts, query excluded.
    pub fn bm25_runs(&self, spec: &SegmentSpec, k: usize) -> Runs {
        let index = Bm25Index::build(
            self.corpus
                .iter()
                .map(|e| (e.id.clone(), build_structured_text(e, spec))),
            Bm25Params::default(),
        );
        self.retrieved
            .keys()
            .filter_map(|q| self.corpus.get(q))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|query| {
                let tokens = tokenize(&build_structured_text(query, spec));
                let ids = index
                    .top_k(&tokens, k, Some(&query.id))
                    .into_iter()
                    .map(|c| c.id)
                    .collect();
                (query.id.clone(), ids)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    }

    pub fn evaluate_bm25(&self, spec: &SegmentSpec, k: usize) -> Result<EvalReport, EvalError> {
        evaluate_run(&self.bm25_runs(spec, k), self.judgments, &self.cutoffs)
    }
}
