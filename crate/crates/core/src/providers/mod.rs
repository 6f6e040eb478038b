//! Model boundary: the bi-encoder embedder, the cross-encoder scorer, and
//! category-instructed entity extraction.
//!
//! Two backends sit behind [`Provider`]: a deterministic offline mock and a
//! client for any OpenAI-compatible HTTP server. Every embedding and snippet
//! goes through a content-addressed [`ProviderCache`], and hand-curated
//! [`EntityOverrides`] take precedence over extraction output.

mod cache;
mod http;
mod mock;
mod snippet;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::event::EventRecord;

pub use cache::{content_digest, ProviderCache};
pub use mock::{mock_embed, mock_extract, MOCK_DIMENSION};
pub use snippet::{CategorySnippet, Entity, EntityOverrides};

use http::HttpBackend;

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("provider returned HTTP {status}: {body}")]
    Api { status: u16, body: String },
    #[error("embedding dimension {got} does not match expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty text cannot be embedded or scored")]
    EmptyText,
    #[error("embedding contains non-finite values")]
    NonFinite,
    #[error("malformed provider output: {0}")]
    MalformedOutput(String),
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// A fixed-length vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ProviderError> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Self(values))
        } else {
            Err(ProviderError::NonFinite)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = ProviderError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Mock,
    Http,
}

fn default_batch_size() -> usize {
    64
}
fn default_timeout() -> f64 {
    60.0
}
fn default_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    1000
}
fn default_concurrency() -> usize {
    4
}
fn default_embedding_model() -> String {
    "hash-256-v1".into()
}
fn default_chat_model() -> String {
    "heuristic-ner-v1".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default = "default_embedding_model")]
    pub embedding_model: String,
    #[serde(default = "default_chat_model")]
    pub chat_model: String,
    /// Model for `/v1/rerank`; when unset, cross scores are cosine over embeddings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rerank_model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    /// Declared embedding dimension; checked against every returned vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides_path: Option<PathBuf>,
}

impl ProviderConfig {
    pub fn mock() -> Self {
        Self {
            kind: ProviderKind::Mock,
            endpoint: None,
            embedding_model: default_embedding_model(),
            chat_model: default_chat_model(),
            rerank_model: None,
            api_key_env: None,
            dimension: None,
            batch_size: default_batch_size(),
            timeout_secs: default_timeout(),
            retries: default_retries(),
            backoff_ms: default_backoff_ms(),
            concurrency: default_concurrency(),
            cache_dir: None,
            overrides_path: None,
        }
    }

    pub fn http(
        endpoint: &str,
        api_key_env: &str,
        embedding_model: &str,
        chat_model: &str,
    ) -> Self {
        Self {
            kind: ProviderKind::Http,
            endpoint: Some(endpoint.to_string()),
            embedding_model: embedding_model.to_string(),
            chat_model: chat_model.to_string(),
            api_key_env: Some(api_key_env.to_string()),
            ..Self::mock()
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.batch_size == 0 {
            return Err(ProviderError::Config(
                "batch_size must be at least 1".into(),
            ));
        }
        if self.kind == ProviderKind::Http {
            if self.endpoint.as_deref().is_none_or(str::is_empty) {
                return Err(ProviderError::Config(
                    "http provider requires `endpoint`".into(),
                ));
            }
            if self.api_key_env.as_deref().is_none_or(str::is_empty) {
                return Err(ProviderError::Config(
                    "http provider requires `api_key_env`".into(),
                ));
            }
        }
        Ok(())
    }
}

/// How cross scores were produced; recorded in run manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossMode {
    CosineEmbedding,
    RerankEndpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderManifest {
    pub kind: ProviderKind,
    pub provider_id: String,
    pub embedding_model: String,
    pub chat_model: String,
    pub cross_mode: CrossMode,
    pub prompt_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderStats {
    pub embeddings_computed: usize,
    pub embedding_cache_hits: usize,
    pub snippets_extracted: usize,
    pub snippet_cache_hits: usize,
    pub ner_fallbacks: usize,
}

enum Backend {
    Mock,
    Http(HttpBackend),
}

#[derive(Default)]
struct Counters {
    embeddings_computed: AtomicUsize,
    embedding_cache_hits: AtomicUsize,
    snippets_extracted: AtomicUsize,
    snippet_cache_hits: AtomicUsize,
    ner_fallbacks: AtomicUsize,
}

pub struct Provider {
    backend: Backend,
    kind: ProviderKind,
    provider_id: String,
    embedding_model: String,
    chat_model: String,
    dimension: OnceLock<usize>,
    cache: ProviderCache,
    overrides: EntityOverrides,
    counters: Counters,
}

impl std::fmt::Debug for Provider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Provider")
            .field("provider_id", &self.provider_id)
            .field("embedding_model", &self.embedding_model)
            .field("chat_model", &self.chat_model)
            .finish_non_exhaustive()
    }
}

impl Provider {
    /// In-memory mock provider with no cache directory.
    pub fn mock() -> Self {
        Self::from_config(&ProviderConfig::mock()).expect("mock config is valid")
    }

    pub fn from_config(config: &ProviderConfig) -> Result<Self, ProviderError> {
        config.validate()?;
        let (backend, provider_id) = match config.kind {
            ProviderKind::Mock => (Backend::Mock, "mock".to_string()),
            ProviderKind::Http => {
                let endpoint = config.endpoint.as_deref().unwrap_or_default();
                let id = format!(
                    "http-{}",
                    &content_digest(endpoint.trim_end_matches('/'))[..8]
                );
                (Backend::Http(HttpBackend::new(config)?), id)
            }
        };
        let dimension = OnceLock::new();
        match (config.kind, config.dimension) {
            (_, Some(d)) => {
                let _ = dimension.set(d);
            }
            (ProviderKind::Mock, None) => {
                let _ = dimension.set(MOCK_DIMENSION);
            }
            _ => {}
        }
        let overrides = match &config.overrides_path {
            Some(path) => EntityOverrides::load(path)?,
            None => EntityOverrides::default(),
        };
        Ok(Self {
            backend,
            kind: config.kind,
            cache: ProviderCache::new(config.cache_dir.as_deref(), &provider_id)?,
            provider_id,
            embedding_model: config.embedding_model.clone(),
            chat_model: config.chat_model.clone(),
            dimension,
            overrides,
            counters: Counters::default(),
        })
    }

    pub fn with_overrides(mut self, overrides: EntityOverrides) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn overrides(&self) -> &EntityOverrides {
        &self.overrides
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn cross_mode(&self) -> CrossMode {
        match &self.backend {
            Backend::Http(b) if b.has_rerank() => CrossMode::RerankEndpoint,
            _ => CrossMode::CosineEmbedding,
        }
    }

    pub fn manifest(&self) -> ProviderManifest {
        ProviderManifest {
            kind: self.kind,
            provider_id: self.provider_id.clone(),
            embedding_model: self.embedding_model.clone(),
            chat_model: self.chat_model.clone(),
            cross_mode: self.cross_mode(),
            prompt_version: http::NER_PROMPT_VERSION.to_string(),
            dimension: self.dimension.get().copied(),
        }
    }

    pub fn stats(&self) -> ProviderStats {
        let c = &self.counters;
        ProviderStats {
            embeddings_computed: c.embeddings_computed.load(Ordering::Relaxed),
            embedding_cache_hits: c.embedding_cache_hits.load(Ordering::Relaxed),
            snippets_extracted: c.snippets_extracted.load(Ordering::Relaxed),
            snippet_cache_hits: c.snippet_cache_hits.load(Ordering::Relaxed),
            ner_fallbacks: c.ner_fallbacks.load(Ordering::Relaxed),
        }
    }

    fn check_dimension(&self, v: &EmbeddingVector) -> Result<(), ProviderError> {
        let expected = *self.dimension.get_or_init(|| v.dimension());
        if v.dimension() != expected {
            return Err(ProviderError::DimensionMismatch {
                expected,
                got: v.dimension(),
            });
        }
        Ok(())
    }

    /// Embeds `texts` in order, serving cache hits without re-fetching.
    pub fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        if texts.iter().any(|t| t.trim().is_empty()) {
            return Err(ProviderError::EmptyText);
        }
        let digests: Vec<String> = texts.iter().map(|t| content_digest(t)).collect();
        let mut out: Vec<Option<EmbeddingVector>> = Vec::with_capacity(texts.len());
        let mut misses: Vec<usize> = Vec::new();
        for (i, digest) in digests.iter().enumerate() {
            match self.cache.get_vector(&self.embedding_model, digest)? {
                Some(v) => {
                    self.check_dimension(&v)?;
                    self.counters
                        .embedding_cache_hits
                        .fetch_add(1, Ordering::Relaxed);
                    out.push(Some(v));
                }
                None => {
                    if !misses.iter().any(|&j| digests[j] == *digest) {
                        misses.push(i);
                    }
                    out.push(None);
                }
            }
        }
        if !misses.is_empty() {
            let pending: Vec<String> = misses.iter().map(|&i| texts[i].clone()).collect();
            let fresh = match &self.backend {
                Backend::Mock => pending.iter().map(|t| mock_embed(t)).collect(),
                Backend::Http(http) => http.embed(&pending)?,
            };
            for (&i, v) in misses.iter().zip(fresh) {
                self.check_dimension(&v)?;
                self.cache
                    .put_vector(&self.embedding_model, &digests[i], &v)?;
                self.counters
                    .embeddings_computed
                    .fetch_add(1, Ordering::Relaxed);
                for (j, slot) in out.iter_mut().enumerate() {
                    if slot.is_none() && digests[j] == digests[i] {
                        *slot = Some(v.clone());
                    }
                }
            }
        }
        Ok(out
            .into_iter()
            .map(|v| v.expect("every slot filled"))
            .collect())
    }

    pub fn embed(&self, text: &str) -> Result<EmbeddingVector, ProviderError> {
        Ok(self.embed_batch(&[text.to_string()])?.remove(0))
    }

    /// Symmetric pair score in [-1, 1].
    pub fn cross_score(&self, a: &str, b: &str) -> Result<f64, ProviderError> {
        if a.trim().is_empty() || b.trim().is_empty() {
            return Err(ProviderError::EmptyText);
        }
        let (first, second) = if a <= b { (a, b) } else { (b, a) };
        let score = match &self.backend {
            Backend::Http(http) if http.has_rerank() => http.rerank_score(first, second)?,
            _ => {
                let v = self.embed_batch(&[first.to_string(), second.to_string()])?;
                crate::retrieval::cosine_similarity(&v[0], &v[1])
                    .map_err(|e| ProviderError::MalformedOutput(e.to_string()))?
            }
        };
        Ok(score.clamp(-1.0, 1.0))
    }

    /// Category-instructed entity extraction for free text.
    ///
    /// Replies that stay malformed after every retry fall back to a
    /// categories-only snippet.
    pub fn extract_entities(
        &self,
        text: &str,
        tags: &[String],
    ) -> Result<CategorySnippet, ProviderError> {
        if tags.is_empty() {
            return Ok(CategorySnippet::categories_only(Vec::new()));
        }
        let key = format!(
            "{}\u{1f}{}\u{1f}{}",
            http::NER_PROMPT_VERSION,
            tags.join("\u{1e}"),
            text
        );
        let digest = content_digest(&key);
        if let Some(s) = self.cache.get_snippet(&self.chat_model, &digest)? {
            self.counters
                .snippet_cache_hits
                .fetch_add(1, Ordering::Relaxed);
            return Ok(s);
        }
        let snippet = match &self.backend {
            Backend::Mock => mock_extract(text, tags),
            Backend::Http(http) => match http.extract(text, tags)? {
                Some(entities) => CategorySnippet::new(tags.to_vec(), entities),
                None => {
                    self.counters.ner_fallbacks.fetch_add(1, Ordering::Relaxed);
                    log::warn!("entity extraction stayed malformed; using categories only");
                    return Ok(CategorySnippet::categories_only(tags.to_vec()));
                }
            },
        };
        self.counters
            .snippets_extracted
            .fetch_add(1, Ordering::Relaxed);
        self.cache
            .put_snippet(&self.chat_model, &digest, &snippet)?;
        Ok(snippet)
    }

    /// Snippet for a corpus event: override if present, else extraction over
    /// title and summary.
    pub fn snippet_for(&self, event: &EventRecord) -> Result<CategorySnippet, ProviderError> {
        if let Some(s) = self.overrides.get(&event.id) {
            return Ok(s.clone());
        }
        self.extract_entities(&event.narrative(), &event.categories)
    }
}
