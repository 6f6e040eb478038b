//! Blocking client for OpenAI-compatible `/v1/embeddings`, `/v1/chat/completions`
//! and (optionally) `/v1/rerank` endpoints.

use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{EmbeddingVector, Entity, ProviderConfig, ProviderError};

pub(crate) const NER_PROMPT: &str = include_str!("../../assets/ner_prompt_v1.txt");
pub(crate) const NER_PROMPT_VERSION: &str = "ner-v1";

pub(crate) struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    api_key: String,
    embedding_model: String,
    chat_model: String,
    rerank_model: Option<String>,
    batch_size: usize,
    concurrency: usize,
    retries: u32,
    backoff: Duration,
}

#[derive(Deserialize)]
struct EmbeddingsResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    #[serde(default)]
    index: Option<usize>,
    embedding: Vec<f64>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct EntityReply {
    entities: Vec<Entity>,
}

#[derive(Deserialize)]
struct RerankResponse {
    results: Vec<RerankItem>,
}

#[derive(Deserialize)]
struct RerankItem {
    #[serde(default)]
    index: usize,
    relevance_score: f64,
}

impl HttpBackend {
    pub(crate) fn new(config: &ProviderConfig) -> Result<Self, ProviderError> {
        let endpoint = config
            .endpoint
            .as_deref()
            .ok_or_else(|| ProviderError::Config("http provider requires `endpoint`".into()))?
            .trim_end_matches('/')
            .to_string();
        let key_var = config
            .api_key_env
            .as_deref()
            .ok_or_else(|| ProviderError::Config("http provider requires `api_key_env`".into()))?;
        let api_key = std::env::var(key_var).map_err(|_| {
            ProviderError::Config(format!("environment variable `{key_var}` is not set"))
        })?;
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build();
        Ok(Self {
            agent,
            endpoint,
            api_key,
            embedding_model: config.embedding_model.clone(),
            chat_model: config.chat_model.clone(),
            rerank_model: config.rerank_model.clone(),
            batch_size: config.batch_size.max(1),
            concurrency: config.concurrency.max(1),
            retries: config.retries,
            backoff: Duration::from_millis(config.backoff_ms),
        })
    }

    pub(crate) fn has_rerank(&self) -> bool {
        self.rerank_model.is_some()
    }

    /// POSTs `body`, retrying transport failures, 429 and 5xx with exponential
    /// backoff (`backoff`, then ×2 per attempt).
    fn post(&self, path: &str, body: &Value) -> Result<ureq::Response, ProviderError> {
        let url = format!("{}{}", self.endpoint, path);
        let mut delay = self.backoff;
        let mut attempt = 0;
        loop {
            let result = self
                .agent
                .post(&url)
                .set("Authorization", &format!("Bearer {}", self.api_key))
                .set("Content-Type", "application/json")
                .send_json(body.clone());
            let retryable = match result {
                Ok(resp) => return Ok(resp),
                Err(ureq::Error::Status(code, resp)) => {
                    let text = resp.into_string().unwrap_or_default();
                    if code != 429 && code < 500 {
                        return Err(ProviderError::Api {
                            status: code,
                            body: text,
                        });
                    }
                    ProviderError::Api {
                        status: code,
                        body: text,
                    }
                }
                Err(ureq::Error::Transport(t)) => ProviderError::Transport(t.to_string()),
            };
            if attempt >= self.retries {
                return Err(match retryable {
                    ProviderError::Transport(msg) => ProviderError::Transport(format!(
                        "{url}: {msg} (after {} attempts)",
                        attempt + 1
                    )),
                    other => other,
                });
            }
            log::warn!("request to {url} failed ({retryable}); retrying in {delay:?}");
            thread::sleep(delay);
            delay *= 2;
            attempt += 1;
        }
    }

    fn embed_chunk(&self, chunk: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let body = json!({ "model": self.embedding_model, "input": chunk });
        let resp: EmbeddingsResponse = self
            .post("/v1/embeddings", &body)?
            .into_json()
            .map_err(|e| ProviderError::MalformedOutput(format!("embeddings response: {e}")))?;
        if resp.data.len() != chunk.len() {
            return Err(ProviderError::MalformedOutput(format!(
                "expected {} embeddings, got {}",
                chunk.len(),
                resp.data.len()
            )));
        }
        let mut items: Vec<(usize, Vec<f64>)> = resp
            .data
            .into_iter()
            .enumerate()
            .map(|(pos, item)| (item.index.unwrap_or(pos), item.embedding))
            .collect();
        items.sort_by_key(|(i, _)| *i);
        items
            .into_iter()
            .map(|(_, values)| EmbeddingVector::new(values))
            .collect()
    }

    /// Order-preserving; chunks of `batch_size` run on up to `concurrency` threads.
    pub(crate) fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let chunks: Vec<&[String]> = texts.chunks(self.batch_size).collect();
        let mut out = Vec::with_capacity(texts.len());
        for wave in chunks.chunks(self.concurrency) {
            let results: Vec<Result<Vec<EmbeddingVector>, ProviderError>> = thread::scope(|s| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|chunk| s.spawn(move || self.embed_chunk(chunk)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| {
                        h.join().unwrap_or_else(|_| {
                            Err(ProviderError::Transport("worker panicked".into()))
                        })
                    })
                    .collect()
            });
            for r in results {
                out.extend(r?);
            }
        }
        Ok(out)
    }

    /// One chat completion per attempt. `Ok(None)` means every attempt
    /// returned unusable output.
    pub(crate) fn extract(
        &self,
        text: &str,
        tags: &[String],
    ) -> Result<Option<Vec<Entity>>, ProviderError> {
        let body = chat_request(&self.chat_model, text, tags);
        for attempt in 0..=self.retries {
            let resp: ChatResponse = match self.post("/v1/chat/completions", &body)?.into_json() {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("chat response unreadable (attempt {}): {e}", attempt + 1);
                    continue;
                }
            };
            let content = resp
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content);
            match content.as_deref().map(|c| parse_entity_reply(c, tags)) {
                Some(Ok(entities)) => return Ok(Some(entities)),
                Some(Err(msg)) => {
                    log::warn!("malformed entity reply (attempt {}): {msg}", attempt + 1)
                }
                None => log::warn!("empty chat reply (attempt {})", attempt + 1),
            }
        }
        Ok(None)
    }

    pub(crate) fn rerank_score(&self, query: &str, document: &str) -> Result<f64, ProviderError> {
        let model = self.rerank_model.as_deref().unwrap_or_default();
        let body = json!({ "model": model, "query": query, "documents": [document] });
        let resp: RerankResponse = self
            .post("/v1/rerank", &body)?
            .into_json()
            .map_err(|e| ProviderError::MalformedOutput(format!("rerank response: {e}")))?;
        resp.results
            .into_iter()
            .find(|r| r.index == 0)
            .map(|r| r.relevance_score)
            .filter(|s| s.is_finite())
            .ok_or_else(|| ProviderError::MalformedOutput("rerank response has no score".into()))
    }
}

/// Chat-completion body for category-instructed entity extraction.
pub(crate) fn chat_request(model: &str, text: &str, tags: &[String]) -> Value {
    let tag_list = serde_json::to_string(tags).expect("strings serialize");
    json!({
        "model": model,
        "messages": [
            { "role": "system", "content": NER_PROMPT },
            { "role": "user", "content": format!("Category tags: {tag_list}\n\nText:\n{text}") }
        ],
        "response_format": { "type": "json_object" },
        "temperature": 0
    })
}

/// Validates a `{"entities":[{"text","category"}]}` reply against `tags`.
///
/// Category names are matched case-insensitively and normalized to the
/// given spelling; an unknown category makes the whole reply malformed.
pub(crate) fn parse_entity_reply(content: &str, tags: &[String]) -> Result<Vec<Entity>, String> {
    let trimmed = content.trim();
    let json = trimmed
        .strip_prefix("```json")
        .or_else(|| trimmed.strip_prefix("```"))
        .and_then(|s| s.strip_suffix("```"))
        .unwrap_or(trimmed);
    let reply: EntityReply = serde_json::from_str(json).map_err(|e| e.to_string())?;
    reply
        .entities
        .into_iter()
        .map(|e| {
            let tag = tags
                .iter()
                .find(|t| t.eq_ignore_ascii_case(e.category.trim()))
                .ok_or_else(|| format!("unknown category `{}`", e.category))?;
            let text = e.text.trim();
            if text.is_empty() {
                return Err("empty entity text".to_string());
            }
            Ok(Entity {
                text: text.to_string(),
                category: tag.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags() -> Vec<String> {
        vec!["Marine Mammals".into(), "Death / Die-off / Decline".into()]
    }

    #[test]
    fn prompt_has_required_ingredients() {
        assert!(NER_PROMPT.contains("expert environmental-event annotator"));
        assert!(NER_PROMPT.contains(
            "for each given category tag, list the entities in the text belonging to that category"
        ));
        assert!(NER_PROMPT.contains("step by step"));
        assert!(NER_PROMPT.contains(r#"{"entities":[{"text""#));
        assert!(!NER_PROMPT.to_lowercase().contains("leo"));
    }

    #[test]
    fn request_shape() {
        let body = chat_request("gpt-x", "whale text", &tags());
        assert_eq!(body["model"], "gpt-x");
        assert_eq!(body["response_format"]["type"], "json_object");
        assert_eq!(body["messages"][0]["role"], "system");
        let user = body["messages"][1]["content"].as_str().unwrap();
        assert!(user.contains(r#"["Marine Mammals","Death / Die-off / Decline"]"#));
        assert!(user.ends_with("whale text"));
    }

    #[test]
    fn reply_parsing() {
        let ok = parse_entity_reply(
            r#"{"entities":[{"text":" humpback whale ","category":"marine mammals"}]}"#,
            &tags(),
        )
        .unwrap();
        assert_eq!(
            ok,
            vec![Entity {
                text: "humpback whale".into(),
                category: "Marine Mammals".into()
            }]
        );
        let fenced = "```json\n{\"entities\":[]}\n```";
        assert!(parse_entity_reply(fenced, &tags()).unwrap().is_empty());
        assert!(parse_entity_reply("not json", &tags()).is_err());
        assert!(
            parse_entity_reply(r#"{"entities":[{"text":"x","category":"Birds"}]}"#, &tags())
                .is_err()
        );
        assert!(parse_entity_reply(r#"{"items":[]}"#, &tags()).is_err());
    }
}
