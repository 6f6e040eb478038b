//! Event corpus schema: records, coordinates, structured text, and calendar helpers.

mod calendar;
mod parse;
mod segment;

use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use calendar::day_of_year;
pub use parse::{
    parse_corpus, write_corpus, CorpusError, Diagnostic, DiagnosticKind, ParsedCorpus,
};
pub use segment::{build_structured_text, Segment, SegmentSpec, SegmentSpecError};

/// A latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub latitude: f64,
    pub longitude: f64,
}

impl GeoPoint {
    pub const fn new(latitude: f64, longitude: f64) -> Self {
        Self {
            latitude,
            longitude,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.latitude.is_finite()
            && self.longitude.is_finite()
            && (-90.0..=90.0).contains(&self.latitude)
            && (-180.0..=180.0).contains(&self.longitude)
    }
}

/// One corpus event.
///
/// `related_ids` holds the curated "see also" links that serve as relevance
/// judgments during evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub summary: String,
    #[serde(default)]
    pub location_name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub date: NaiveDate,
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub related_ids: Vec<String>,
}

impl EventRecord {
    pub fn point(&self) -> GeoPoint {
        GeoPoint::new(self.latitude, self.longitude)
    }

    /// Title and summary joined by a newline; the text handed to entity extraction.
    pub fn narrative(&self) -> String {
        if self.summary.is_empty() {
            self.title.clone()
        } else {
            format!("{}\n{}", self.title, self.summary)
        }
    }
}

/// An immutable, id-indexed collection of events.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    events: Vec<EventRecord>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids.
    pub fn from_events(events: Vec<EventRecord>) -> Result<Self, CorpusError> {
        let mut by_id = HashMap::with_capacity(events.len());
        for (idx, event) in events.iter().enumerate() {
            if by_id.insert(event.id.clone(), idx).is_some() {
                return Err(CorpusError::DuplicateId(event.id.clone()));
            }
        }
        Ok(Self { events, by_id })
    }

    /// Number of events, N_z.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn get(&self, id: &str) -> Option<&EventRecord> {
        self.by_id.get(id).map(|&idx| &self.events[idx])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &EventRecord> {
        self.events.iter()
    }
}
