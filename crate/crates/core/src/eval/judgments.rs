use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::event::Corpus;

/// Relevant event ids per query. Directed unless symmetrized.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Judgments(BTreeMap<String, BTreeSet<String>>);

#[derive(Deserialize)]
struct JudgmentLine {
    query_id: String,
    relevant_ids: Vec<String>,
}

impl Judgments {
    /// Drops self-links; empty sets are kept so they can be counted as skipped.
    pub fn from_map(map: BTreeMap<String, BTreeSet<String>>) -> Self {
        Self(
            map.into_iter()
                .map(|(q, mut rel)| {
                    rel.remove(&q);
                    (q, rel)
                })
                .collect(),
        )
    }

    /// "See also" links from the corpus. Dangling ids and self-links are
    /// dropped; `symmetrize` adds the reverse of every link.
    pub fn from_corpus(corpus: &Corpus, symmetrize: bool) -> Self {
        let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for event in corpus.iter() {
            let rel = map.entry(event.id.clone()).or_default();
            for r in &event.related_ids {
                if r != &event.id && corpus.contains(r) {
                    rel.insert(r.clone());
                }
            }
        }
        if symmetrize {
            let links: Vec<(String, String)> = map
                .iter()
                .flat_map(|(q, rel)| rel.iter().map(move |r| (r.clone(), q.clone())))
                .collect();
            for (from, to) in links {
                map.entry(from).or_default().insert(to);
            }
        }
        Self(map)
    }

    /// Reads `{"query_id", "relevant_ids"}` lines. Ids unknown to `corpus`
    /// are dropped.
    pub fn load_jsonl<R: BufRead>(source: R, corpus: &Corpus) -> Result<Self, EvalError> {
        let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (n, line) in source.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: JudgmentLine = serde_json::from_str(&line)
                .map_err(|e| EvalError::Judgments(format!("line {}: {e}", n + 1)))?;
            if !corpus.contains(&parsed.query_id) {
                log::warn!("judgment for unknown query `{}` ignored", parsed.query_id);
                continue;
            }
            let rel = map.entry(parsed.query_id).or_default();
            rel.extend(
                parsed
                    .relevant_ids
                    .into_iter()
                    .filter(|r| corpus.contains(r)),
            );
        }
        Ok(Self::from_map(map))
    }

    pub fn get(&self, query_id: &str) -> Option<&BTreeSet<String>> {
        self.0.get(query_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.0.iter()
    }

    /// Query ids with a non-empty relevant set, sorted.
    pub fn evaluable_queries(&self) -> Vec<String> {
        self.0
            .iter()
            .filter(|(_, r)| !r.is_empty())
            .map(|(q, _)| q.clone())
            .collect()
    }

    pub fn skipped_count(&self) -> usize {
        self.0.values().filter(|r| r.is_empty()).count()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
