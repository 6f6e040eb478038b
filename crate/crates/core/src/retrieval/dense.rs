use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{cosine_similarity, RetrievalError, ScoredCandidate};
use crate::event::{build_structured_text, Corpus, EventRecord, SegmentSpec};
use crate::providers::{content_digest, EmbeddingVector, Provider};

pub const INDEX_MANIFEST: &str = "dense_index.manifest.json";
pub const INDEX_VECTORS: &str = "dense_index.jsonl";

/// Corpus-side embeddings under one segment spec and provider.
#[derive(Debug, Clone)]
pub struct DenseIndex {
    spec: SegmentSpec,
    provider_id: String,
    model: String,
    ids: Vec<String>,
    vectors: Vec<EmbeddingVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseIndexManifest {
    pub provider_id: String,
    pub model: String,
    pub segment_spec: SegmentSpec,
    pub count: usize,
    pub dimension: usize,
}

#[derive(Serialize, Deserialize)]
struct VectorRecord {
    id: String,
    digest: String,
    dim: usize,
    values: Vec<f64>,
}

impl DenseIndex {
    pub fn build(
        corpus: &Corpus,
        spec: &SegmentSpec,
        provider: &Provider,
    ) -> Result<Self, RetrievalError> {
        let texts: Vec<String> = corpus
            .iter()
            .map(|e| build_structured_text(e, spec))
            .collect();
        let vectors = if texts.is_empty() {
            Vec::new()
        } else {
            provider.embed_batch(&texts)?
        };
        Ok(Self {
            spec: spec.clone(),
            provider_id: provider.provider_id().to_string(),
            model: provider.manifest().embedding_model,
            ids: corpus.iter().map(|e| e.id.clone()).collect(),
            vectors,
        })
    }

    pub fn spec(&self) -> &SegmentSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.vectors.first().map_or(0, EmbeddingVector::dimension)
    }

    pub fn vector(&self, id: &str) -> Option<&EmbeddingVector> {
        self.ids
            .iter()
            .position(|i| i == id)
            .map(|p| &self.vectors[p])
    }

    pub fn manifest(&self) -> DenseIndexManifest {
        DenseIndexManifest {
            provider_id: self.provider_id.clone(),
            model: self.model.clone(),
            segment_spec: self.spec.clone(),
            count: self.ids.len(),
            dimension: self.dimension(),
        }
    }

    pub fn save(&self, dir: &Path, corpus: &Corpus) -> Result<(), RetrievalError> {
        std::fs::create_dir_all(dir)?;
        let manifest = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        std::fs::write(dir.join(INDEX_MANIFEST), manifest + "\n")?;
        let mut out = BufWriter::new(File::create(dir.join(INDEX_VECTORS))?);
        for (id, v) in self.ids.iter().zip(&self.vectors) {
            let text = corpus
                .get(id)
                .map(|e| build_structured_text(e, &self.spec))
                .unwrap_or_default();
            let record = VectorRecord {
                id: id.clone(),
                digest: content_digest(&text),
                dim: v.dimension(),
                values: v.values().to_vec(),
            };
            serde_json::to_writer(&mut out, &record).expect("record serializes");
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, RetrievalError> {
        let manifest: DenseIndexManifest =
            serde_json::from_reader(File::open(dir.join(INDEX_MANIFEST))?)
                .map_err(|e| RetrievalError::Index(format!("manifest: {e}")))?;
        let mut ids = Vec::new();
        let mut vectors = Vec::new();
        for line in BufReader::new(File::open(dir.join(INDEX_VECTORS))?).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: VectorRecord =
                serde_json::from_str(&line).map_err(|e| RetrievalError::Index(e.to_string()))?;
            if rec.dim != manifest.dimension || rec.values.len() != rec.dim {
                return Err(RetrievalError::DimensionMismatch {
                    left: manifest.dimension,
                    right: rec.values.len(),
                });
            }
            ids.push(rec.id);
            vectors.push(EmbeddingVector::new(rec.values)?);
        }
        if ids.len() != manifest.count {
            return Err(RetrievalError::Index(format!(
                "manifest declares {} vectors, found {}",
                manifest.count,
                ids.len()
            )));
        }
        Ok(Self {
            spec: manifest.segment_spec,
            provider_id: manifest.provider_id,
            model: manifest.model,
            ids,
            vectors,
        })
    }
}

/// Stage-1 output: `candidates[i]` holds raw semantic rank `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retrieved {
    pub query_id: String,
    pub candidates: Vec<ScoredCandidate>,
}

impl Retrieved {
    pub fn ids(&self) -> Vec<String> {
        self.candidates.iter().map(|c| c.id.clone()).collect()
    }

    /// Raw descending semantic rank (1-based) of every retrieved candidate.
    pub fn ranks(&self) -> Vec<(String, usize)> {
        self.candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.clone(), i + 1))
            .collect()
    }
}

/// Cosine between the query's structured text and every other corpus event;
/// keeps the top `n_retrieve` by (score desc, id asc).
pub fn dense_retrieve(
    query: &EventRecord,
    index: &DenseIndex,
    spec: &SegmentSpec,
    n_retrieve: usize,
    provider: &Provider,
) -> Result<Retrieved, RetrievalError> {
    if index.spec() != spec {
        return Err(RetrievalError::SpecMismatch {
            index: index.spec().label(),
            query: spec.label(),
        });
    }
    if index.is_empty() {
        return Ok(Retrieved {
            query_id: query.id.clone(),
            candidates: Vec::new(),
        });
    }
    let query_vec = match index.vector(&query.id) {
        Some(v) => v.clone(),
        None => provider.embed(&build_structured_text(query, spec))?,
    };
    let mut scored = index
        .ids
        .iter()
        .zip(&index.vectors)
        .filter(|(id, _)| **id != query.id)
        .map(|(id, v)| {
            Ok(ScoredCandidate {
                id: id.clone(),
                score: cosine_similarity(&query_vec, v)?,
            })
        })
        .collect::<Result<Vec<_>, RetrievalError>>()?;
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
    scored.truncate(n_retrieve);
    Ok(Retrieved {
        query_id: query.id.clone(),
        candidates: scored,
    })
}
