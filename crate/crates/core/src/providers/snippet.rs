use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::event::Corpus;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub text: String,
    pub category: String,
}

/// Category tags fused with the entities found under each tag.
///
/// `rendered` is derived from the other two fields and is what the
/// cross-encoder compares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RawSnippet")]
pub struct CategorySnippet {
    categories: Vec<String>,
    entities: Vec<Entity>,
    rendered: String,
}

#[derive(Deserialize)]
struct RawSnippet {
    #[serde(default)]
    categories: Vec<String>,
    #[serde(default)]
    entities: Vec<Entity>,
}

impl From<RawSnippet> for CategorySnippet {
    fn from(raw: RawSnippet) -> Self {
        CategorySnippet::new(raw.categories, raw.entities)
    }
}

impl CategorySnippet {
    /// Entities whose tag is not among `categories` are dropped, as are
    /// exact duplicates.
    pub fn new(categories: Vec<String>, entities: Vec<Entity>) -> Self {
        let mut kept: Vec<Entity> = Vec::with_capacity(entities.len());
        for e in entities {
            if categories.contains(&e.category) && !e.text.trim().is_empty() && !kept.contains(&e) {
                kept.push(e);
            }
        }
        let rendered = render(&categories, &kept);
        Self {
            categories,
            entities: kept,
            rendered,
        }
    }

    pub fn categories_only(categories: Vec<String>) -> Self {
        Self::new(categories, Vec::new())
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn rendered(&self) -> &str {
        &self.rendered
    }

    pub fn entities_for<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entities
            .iter()
            .filter(move |e| e.category == tag)
            .map(|e| e.text.as_str())
    }
}

fn render(categories: &[String], entities: &[Entity]) -> String {
    categories
        .iter()
        .map(|tag| {
            let names: Vec<&str> = entities
                .iter()
                .filter(|e| &e.category == tag)
                .map(|e| e.text.as_str())
                .collect();
            if names.is_empty() {
                format!("Category: {tag}.")
            } else {
                format!("Category: {tag}; Entities: {}.", names.join(", "))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Hand-curated snippets keyed by event id; these win over any model output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityOverrides(BTreeMap<String, CategorySnippet>);

impl EntityOverrides {
    pub fn load(path: &Path) -> Result<Self, super::ProviderError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| super::ProviderError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| super::ProviderError::Config(format!("{}: {e}", path.display())))
    }

    pub fn insert(&mut self, id: impl Into<String>, snippet: CategorySnippet) {
        self.0.insert(id.into(), snippet);
    }

    pub fn get(&self, id: &str) -> Option<&CategorySnippet> {
        self.0.get(id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Ids that do not resolve against `corpus`.
    pub fn unknown_ids(&self, corpus: &Corpus) -> Vec<String> {
        self.0
            .keys()
            .filter(|id| !corpus.contains(id))
            .cloned()
            .collect()
    }
}
