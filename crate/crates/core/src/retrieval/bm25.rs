use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{tokenize, ScoredCandidate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.5, b: 0.75 }
    }
}

#[derive(Debug, Clone)]
struct Doc {
    id: String,
    term_counts: HashMap<String, u32>,
    len: usize,
}

/// Okapi BM25 over tokenized documents.
#[derive(Debug, Clone)]
pub struct Bm25Index {
    params: Bm25Params,
    docs: Vec<Doc>,
    doc_freq: HashMap<String, usize>,
    avg_len: f64,
}

impl Bm25Index {
    pub fn build<I, S, T>(docs: I, params: Bm25Params) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        let docs: Vec<Doc> = docs
            .into_iter()
            .map(|(id, text)| {
                let tokens = tokenize(text.as_ref());
                let mut term_counts: HashMap<String, u32> = HashMap::new();
                for t in &tokens {
                    *term_counts.entry(t.clone()).or_default() += 1;
                }
                for t in term_counts.keys() {
                    *doc_freq.entry(t.clone()).or_default() += 1;
                }
                Doc {
                    id: id.into(),
                    term_counts,
                    len: tokens.len(),
                }
            })
            .collect();
        let total: usize = docs.iter().map(|d| d.len).sum();
        let avg_len = if docs.is_empty() {
            0.0
        } else {
            total as f64 / docs.len() as f64
        };
        Self {
            params,
            docs,
            doc_freq,
            avg_len,
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_len
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    /// `ln((N - df + 0.5) / (df + 0.5) + 1)`.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.doc_freq(term) as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }

    fn score_doc(&self, doc: &Doc, query: &[String]) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let norm = if self.avg_len > 0.0 {
            doc.len as f64 / self.avg_len
        } else {
            0.0
        };
        query
            .iter()
            .map(|term| {
                let tf = f64::from(doc.term_counts.get(term).copied().unwrap_or(0));
                if tf == 0.0 {
                    return 0.0;
                }
                self.idf(term) * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm))
            })
            .sum()
    }

    /// Scores for every document, in index order.
    pub fn scores(&self, query: &[String]) -> Vec<ScoredCandidate> {
        self.docs
            .iter()
            .map(|d| ScoredCandidate {
                id: d.id.clone(),
                score: self.score_doc(d, query),
            })
            .collect()
    }

    /// Top `k` by descending score, ties by ascending id; `exclude` drops one id.
    pub fn top_k(&self, query: &[String], k: usize, exclude: Option<&str>) -> Vec<ScoredCandidate> {
        if query.is_empty() {
            return Vec::new();
        }
        let mut scored: Vec<ScoredCandidate> = self
            .scores(query)
            .into_iter()
            .filter(|c| Some(c.id.as_str()) != exclude)
            .collect();
        scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        scored.truncate(k);
        scored
    }
}

pub fn bm25_topk(index: &Bm25Index, query_tokens: &[String], k: usize) -> Vec<ScoredCandidate> {
    index.top_k(query_tokens, k, None)
}
