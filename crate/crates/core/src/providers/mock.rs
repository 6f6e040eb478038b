//! Deterministic offline stand-ins for the embedding, cross-encoding and
//! entity-extraction models.

use super::{CategorySnippet, EmbeddingVector, Entity};
use crate::retrieval::tokenize;

pub const MOCK_DIMENSION: usize = 256;
const HASH_SEED: u64 = 0x5eed_9e37_79b9_7f4a;

fn feature_hash(feature: &str) -> u64 {
    // FNV-1a over the seeded state, finished with a splitmix64 round.
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ HASH_SEED;
    for b in feature.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Token unigrams (`w:`) and per-token character trigrams (`c:`).
pub(crate) fn mock_features(text: &str) -> Vec<String> {
    let mut features = Vec::new();
    for token in tokenize(text) {
        let chars: Vec<char> = token.chars().collect();
        for tri in chars.windows(3) {
            features.push(format!("c:{}", tri.iter().collect::<String>()));
        }
        features.push(format!("w:{token}"));
    }
    features
}

/// Signed feature hashing into 256 buckets, L2-normalized.
///
/// A text with no features (or whose features cancel out) maps to the first
/// basis vector.
pub fn mock_embed(text: &str) -> EmbeddingVector {
    let mut values = vec![0.0f64; MOCK_DIMENSION];
    for feature in mock_features(text) {
        let h = feature_hash(&feature);
        let bucket = (h % MOCK_DIMENSION as u64) as usize;
        let sign = if (h >> 63) == 1 { -1.0 } else { 1.0 };
        values[bucket] += sign;
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        values[0] = 1.0;
    } else {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    EmbeddingVector::new(values).expect("finite by construction")
}

fn tag_words(tag: &str) -> Vec<String> {
    tokenize(tag)
        .into_iter()
        .filter(|w| w.chars().count() >= 3)
        .collect()
}

/// Runs of two or more capitalized words, not crossing sentence punctuation.
fn capitalized_spans(text: &str) -> Vec<String> {
    let mut spans = Vec::new();
    let mut run: Vec<&str> = Vec::new();
    let flush = |run: &mut Vec<&str>, spans: &mut Vec<String>| {
        if run.len() >= 2 {
            spans.push(run.join(" "));
        }
        run.clear();
    };
    for raw in text.split_whitespace() {
        let word = raw.trim_matches(|c: char| !c.is_alphanumeric());
        let capitalized = word.chars().next().is_some_and(char::is_uppercase);
        if capitalized {
            run.push(word);
        } else {
            flush(&mut run, &mut spans);
        }
        if raw.ends_with(['.', ',', ';', ':', '!', '?', ')', '(']) {
            flush(&mut run, &mut spans);
        }
    }
    flush(&mut run, &mut spans);
    spans
}

/// Heuristic category-instructed extraction.
///
/// Capitalized multi-word spans are filed under the first tag; any token that
/// literally contains a word of a tag is filed under that tag.
pub fn mock_extract(text: &str, tags: &[String]) -> CategorySnippet {
    if tags.is_empty() {
        return CategorySnippet::categories_only(Vec::new());
    }
    let mut entities = Vec::new();
    for span in capitalized_spans(text) {
        entities.push(Entity {
            text: span,
            category: tags[0].clone(),
        });
    }
    let tokens = tokenize(text);
    for tag in tags {
        let words = tag_words(tag);
        for token in &tokens {
            if words.iter().any(|w| token.contains(w.as_str())) {
                entities.push(Entity {
                    text: token.clone(),
                    category: tag.clone(),
                });
            }
        }
    }
    CategorySnippet::new(tags.to_vec(), entities)
}
