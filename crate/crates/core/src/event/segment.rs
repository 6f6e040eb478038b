use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EventRecord;

/// A selectable text segment of an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Title,
    Summary,
    Location,
    Date,
}

impl Segment {
    pub fn prefix(self) -> &'static str {
        match self {
            Segment::Title => "Title",
            Segment::Summary => "Summary",
            Segment::Location => "Location",
            Segment::Date => "Date",
        }
    }

    fn value(self, event: &EventRecord) -> String {
        match self {
            Segment::Title => event.title.clone(),
            Segment::Summary => event.summary.clone(),
            Segment::Location => event.location_name.clone(),
            Segment::Date => event.date.format("%Y-%m-%d").to_string(),
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.prefix().to_ascii_lowercase())
    }
}

impl FromStr for Segment {
    type Err = SegmentSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "title" => Ok(Segment::Title),
            "summary" => Ok(Segment::Summary),
            "location" => Ok(Segment::Location),
            "date" => Ok(Segment::Date),
            other => Err(SegmentSpecError::UnknownSegment(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SegmentSpecError {
    #[error("segment list is empty")]
    Empty,
    #[error("segment `{0}` listed twice")]
    Duplicate(Segment),
    #[error("unknown segment `{0}`")]
    UnknownSegment(String),
}

/// Which segments feed the embedder, in order, and whether each carries a
/// `Prefix:` label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSegmentSpec", into = "RawSegmentSpec")]
pub struct SegmentSpec {
    segments: Vec<Segment>,
    with_prefix: bool,
}

#[derive(Serialize, Deserialize)]
struct RawSegmentSpec {
    segments: Vec<Segment>,
    with_prefix: bool,
}

impl TryFrom<RawSegmentSpec> for SegmentSpec {
    type Error = SegmentSpecError;

    fn try_from(raw: RawSegmentSpec) -> Result<Self, Self::Error> {
        SegmentSpec::new(raw.segments, raw.with_prefix)
    }
}

impl From<SegmentSpec> for RawSegmentSpec {
    fn from(spec: SegmentSpec) -> Self {
        RawSegmentSpec {
            segments: spec.segments,
            with_prefix: spec.with_prefix,
        }
    }
}

impl SegmentSpec {
    pub fn new(segments: Vec<Segment>, with_prefix: bool) -> Result<Self, SegmentSpecError> {
        if segments.is_empty() {
            return Err(SegmentSpecError::Empty);
        }
        for (i, s) in segments.iter().enumerate() {
            if segments[..i].contains(s) {
                return Err(SegmentSpecError::Duplicate(*s));
            }
        }
        Ok(Self {
            segments,
            with_prefix,
        })
    }

    /// Title, Summary, Location, Date with prefixes.
    pub fn full_prefixed() -> Self {
        Self {
            segments: vec![
                Segment::Title,
                Segment::Summary,
                Segment::Location,
                Segment::Date,
            ],
            with_prefix: true,
        }
    }

    /// Parses a comma-separated list such as `title,summary,location`.
    pub fn parse_list(list: &str, with_prefix: bool) -> Result<Self, SegmentSpecError> {
        let segments = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(segments, with_prefix)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn with_prefix(&self) -> bool {
        self.with_prefix
    }

    /// Short stable label, e.g. `title+summary+location+date/prefix`.
    pub fn label(&self) -> String {
        let names: Vec<String> = self.segments.iter().map(ToString::to_string).collect();
        let mut label = names.join("+");
        if self.with_prefix {
            label.push_str("/prefix");
        }
        label
    }
}

impl Default for SegmentSpec {
    fn default() -> Self {
        Self::full_prefixed()
    }
}

/// Renders the selected segments of `event` as embedder input.
///
/// With prefixes each segment is a `Prefix: value` line; without, raw values
/// are joined by single spaces.
pub fn build_structured_text(event: &EventRecord, spec: &SegmentSpec) -> String {
    let parts = spec.segments.iter().map(|&seg| {
        let value = seg.value(event);
        if spec.with_prefix {
            format!("{}: {}", seg.prefix(), value)
        } else {
            value
        }
    });
    let sep = if spec.with_prefix { "\n" } else { " " };
    parts.collect::<Vec<_>>().join(sep)
}
