//! Content-addressed store for provider outputs.
//!
//! One JSONL file per (provider id, model) under the cache directory. Vector
//! records are `{"digest","dim","values"}`, snippet records are
//! `{"digest","snippet"}`. Without a directory the cache lives in memory only.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CategorySnippet, EmbeddingVector, ProviderError};

pub fn content_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Record {
    Vector {
        digest: String,
        dim: usize,
        values: Vec<f64>,
    },
    Snippet {
        digest: String,
        snippet: CategorySnippet,
    },
}

type Key = (String, String);

#[derive(Default)]
struct State {
    vectors: HashMap<Key, EmbeddingVector>,
    snippets: HashMap<Key, CategorySnippet>,
    loaded: HashSet<String>,
    writers: HashMap<String, BufWriter<File>>,
}

pub struct ProviderCache {
    dir: Option<PathBuf>,
    provider_id: String,
    state: Mutex<State>,
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl ProviderCache {
    pub fn new(dir: Option<&Path>, provider_id: &str) -> Result<Self, ProviderError> {
        if let Some(dir) = dir {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            provider_id: provider_id.to_string(),
            state: Mutex::new(State::default()),
        })
    }

    pub fn file_for(&self, model: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| {
            d.join(format!(
                "{}__{}.jsonl",
                sanitize(&self.provider_id),
                sanitize(model)
            ))
        })
    }

    fn ensure_loaded(&self, state: &mut State, model: &str) -> Result<(), ProviderError> {
        if !state.loaded.insert(model.to_string()) {
            return Ok(());
        }
        let Some(path) = self.file_for(model) else {
            return Ok(());
        };
        if !path.exists() {
            return Ok(());
        }
        let reader = BufReader::new(File::open(&path)?);
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line)
                .map_err(|e| ProviderError::Cache(format!("{}:{}: {e}", path.display(), n + 1)))?;
            match record {
                Record::Vector {
                    digest,
                    dim,
                    values,
                } => {
                    if values.len() != dim {
                        return Err(ProviderError::Cache(format!(
                            "{}:{}: dim {dim} but {} values",
                            path.display(),
                            n + 1,
                            values.len()
                        )));
                    }
                    let v = EmbeddingVector::new(values)?;
                    state.vectors.insert((model.to_string(), digest), v);
                }
                Record::Snippet { digest, snippet } => {
                    state.snippets.insert((model.to_string(), digest), snippet);
                }
            }
        }
        Ok(())
    }

    fn append(&self, state: &mut State, model: &str, record: &Record) -> Result<(), ProviderError> {
        let Some(path) = self.file_for(model) else {
            return Ok(());
        };
        if !state.writers.contains_key(model) {
            let file = OpenOptions::new().create(true).append(true).open(&path)?;
            state
                .writers
                .insert(model.to_string(), BufWriter::new(file));
        }
        let writer = state.writers.get_mut(model).expect("inserted above");
        serde_json::to_writer(&mut *writer, record)
            .map_err(|e| ProviderError::Cache(e.to_string()))?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }

    pub fn get_vector(
        &self,
        model: &str,
        digest: &str,
    ) -> Result<Option<EmbeddingVector>, ProviderError> {
        let mut state = self.state.lock().expect("cache lock poisoned");
        self.ensure_loaded(&mut state, model)?;
        Ok(state
            .vectors
            .get(&(model.to_string(), digest.to_string()))
            .cloned())
    }

    pub fn put_vector(
        &self,
        model: &str,
        digest: &str,
        vector: &EmbeddingVector,
    ) -> Result<(), ProviderError> {
        let mut state = self.state.lock().expect("cache lock poisoned");
        self.ensure_loaded(&mut state, model)?;
        let key = (model.to_string(), digest.to_string());
        if state.vectors.contains_key(&key) {
            return Ok(());
        }
        let record = Record::Vector {
            digest: digest.to_string(),
            dim: vector.dimension(),
            values: vector.values().to_vec(),
        };
        self.append(&mut state, model, &record)?;
        state.vectors.insert(key, vector.clone());
        Ok(())
    }

    pub fn get_snippet(
        &self,
        model: &str,
        digest: &str,
    ) -> Result<Option<CategorySnippet>, ProviderError> {
        let mut state = self.state.lock().expect("cache lock poisoned");
        self.ensure_loaded(&mut state, model)?;
        Ok(state
            .snippets
            .get(&(model.to_string(), digest.to_string()))
            .cloned())
    }

    pub fn put_snippet(
        &self,
        model: &str,
        digest: &str,
        snippet: &CategorySnippet,
    ) -> Result<(), ProviderError> {
        let mut state = self.state.lock().expect("cache lock poisoned");
        self.ensure_loaded(&mut state, model)?;
        let key = (model.to_string(), digest.to_string());
        if state.snippets.contains_key(&key) {
            return Ok(());
        }
        let record = Record::Snippet {
            digest: digest.to_string(),
            snippet: snippet.clone(),
        };
        self.append(&mut state, model, &record)?;
        state.snippets.insert(key, snippet.clone());
        Ok(())
    }
}
