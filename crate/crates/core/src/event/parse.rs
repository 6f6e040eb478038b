use std::collections::HashSet;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{Corpus, EventRecord, GeoPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    MalformedJson,
    DuplicateId,
    CoordinateOutOfRange,
    InvalidDate,
    EmptyTitle,
    DanglingRelatedId,
    EmptyCorpus,
}

impl DiagnosticKind {
    /// Hard errors invalidate the corpus; the rest are warnings.
    pub fn is_error(self) -> bool {
        !matches!(
            self,
            DiagnosticKind::DanglingRelatedId | DiagnosticKind::EmptyCorpus
        )
    }
}

/// One validation problem, serialized as a JSON object per line on stderr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: DiagnosticKind,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("failed to read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate event id `{0}`")]
    DuplicateId(String),
    #[error("corpus has {} invalid record(s); first: line {}: {}", .0.len(), .0[0].line, .0[0].message)]
    Invalid(Vec<Diagnostic>),
}

/// A validated corpus plus the warnings collected on the way.
#[derive(Debug, Clone)]
pub struct ParsedCorpus {
    pub corpus: Corpus,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Deserialize)]
struct RawEvent {
    id: String,
    title: String,
    #[serde(default)]
    summary: String,
    #[serde(default)]
    location_name: String,
    latitude: f64,
    longitude: f64,
    date: String,
    #[serde(default)]
    categories: Vec<String>,
    #[serde(default)]
    related_ids: Vec<String>,
}

/// Reads a JSON Lines corpus, one event object per line.
///
/// Every line is checked; all hard errors are returned together in
/// [`CorpusError::Invalid`]. Dangling `related_ids` and an empty stream are
/// reported as warnings.
pub fn parse_corpus<R: BufRead>(source: R) -> Result<ParsedCorpus, CorpusError> {
    let mut events = Vec::new();
    let mut lines_of = Vec::new();
    let mut diagnostics = Vec::new();
    let mut seen = HashSet::new();

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawEvent = match serde_json::from_str(&line) {
            Ok(raw) => raw,
            Err(e) => {
                diagnostics.push(Diagnostic {
                    line: line_no,
                    id: None,
                    kind: DiagnosticKind::MalformedJson,
                    message: format!("malformed JSON on line {line_no}: {e}"),
                });
                continue;
            }
        };
        let mut push = |kind, message: String| {
            diagnostics.push(Diagnostic {
                line: line_no,
                id: Some(raw.id.clone()),
                kind,
                message,
            });
        };
        let mut ok = true;
        if !seen.insert(raw.id.clone()) {
            push(
                DiagnosticKind::DuplicateId,
                format!("duplicate event id `{}`", raw.id),
            );
            ok = false;
        }
        if !GeoPoint::new(raw.latitude, raw.longitude).is_valid() {
            push(
                DiagnosticKind::CoordinateOutOfRange,
                format!(
                    "coordinate ({}, {}) out of range",
                    raw.latitude, raw.longitude
                ),
            );
            ok = false;
        }
        let date = NaiveDate::parse_from_str(&raw.date, "%Y-%m-%d");
        if date.is_err() {
            push(
                DiagnosticKind::InvalidDate,
                format!("invalid date `{}`", raw.date),
            );
            ok = false;
        }
        if raw.title.trim().is_empty() {
            push(DiagnosticKind::EmptyTitle, "title is empty".to_string());
            ok = false;
        }
        if let (true, Ok(date)) = (ok, date) {
            lines_of.push(line_no);
            events.push(EventRecord {
                id: raw.id,
                title: raw.title,
                summary: raw.summary,
                location_name: raw.location_name,
                latitude: raw.latitude,
                longitude: raw.longitude,
                date,
                categories: raw.categories,
                related_ids: raw.related_ids,
            });
        }
    }

    if diagnostics.iter().any(|d| d.kind.is_error()) {
        return Err(CorpusError::Invalid(diagnostics));
    }

    let mut warnings = diagnostics;
    for (event, &line) in events.iter().zip(&lines_of) {
        for rel in &event.related_ids {
            if !seen.contains(rel) {
                warnings.push(Diagnostic {
                    line,
                    id: Some(event.id.clone()),
                    kind: DiagnosticKind::DanglingRelatedId,
                    message: format!("related id `{rel}` does not exist in the corpus"),
                });
            }
        }
    }
    if events.is_empty() {
        warnings.push(Diagnostic {
            line: 0,
            id: None,
            kind: DiagnosticKind::EmptyCorpus,
            message: "corpus is empty (N_z=0)".to_string(),
        });
    }

    let corpus = Corpus::from_events(events)?;
    Ok(ParsedCorpus { corpus, warnings })
}

/// Writes events as JSON Lines in corpus order.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut sink: W) -> std::io::Result<()> {
    for event in corpus.iter() {
        serde_json::to_writer(&mut sink, event)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KODIAK: &str = r#"{"id":"e1","title":"Humpback found dead near Kodiak gets Alaska's first 2023 whale necropsy","summary":"...","location_name":"Kodiak, Alaska, United States","latitude":57.79,"longitude":-152.407,"date":"2023-10-02","categories":["Marine Mammals","Death / Die-off / Decline"],"related_ids":[]}"#;

    #[test]
    fn parses_kodiak_line() {
        let parsed = parse_corpus(KODIAK.as_bytes()).unwrap();
        assert_eq!(parsed.corpus.len(), 1);
        let e = parsed.corpus.get("e1").unwrap();
        assert_eq!(e.location_name, "Kodiak, Alaska, United States");
        assert_eq!(e.date, NaiveDate::from_ymd_opt(2023, 10, 2).unwrap());
        assert_eq!(
            e.categories,
            vec!["Marine Mammals", "Death / Die-off / Decline"]
        );
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn empty_stream() {
        let parsed = parse_corpus(&b""[..]).unwrap();
        assert_eq!(parsed.corpus.len(), 0);
        assert_eq!(parsed.warnings[0].kind, DiagnosticKind::EmptyCorpus);
    }

    #[test]
    fn duplicate_id_named() {
        let input = format!("{KODIAK}\n{KODIAK}\n");
        let err = parse_corpus(input.as_bytes()).unwrap_err();
        match err {
            CorpusError::Invalid(diags) => {
                assert_eq!(diags.len(), 1);
                assert_eq!(diags[0].kind, DiagnosticKind::DuplicateId);
                assert_eq!(diags[0].line, 2);
                assert!(diags[0].message.contains("e1"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn malformed_line_reports_number() {
        let input = format!("{KODIAK}\n{{not json\n");
        let CorpusError::Invalid(diags) = parse_corpus(input.as_bytes()).unwrap_err() else {
            panic!()
        };
        assert_eq!(diags[0].line, 2);
        assert_eq!(diags[0].kind, DiagnosticKind::MalformedJson);
    }

    #[test]
    fn range_date_and_title_errors() {
        let bad_lat = KODIAK.replace("57.79", "95.0");
        let bad_date = KODIAK
            .replace("2023-10-02", "2023-02-30")
            .replace("\"e1\"", "\"e2\"");
        let no_title = KODIAK
            .replace(
                "Humpback found dead near Kodiak gets Alaska's first 2023 whale necropsy",
                " ",
            )
            .replace("\"e1\"", "\"e3\"");
        let input = [bad_lat, bad_date, no_title].join("\n");
        let CorpusError::Invalid(diags) = parse_corpus(input.as_bytes()).unwrap_err() else {
            panic!()
        };
        let kinds: Vec<_> = diags.iter().map(|d| d.kind).collect();
        assert_eq!(
            kinds,
            vec![
                DiagnosticKind::CoordinateOutOfRange,
                DiagnosticKind::InvalidDate,
                DiagnosticKind::EmptyTitle
            ]
        );
    }

    #[test]
    fn dangling_related_is_warning() {
        let line = KODIAK.replace(r#""related_ids":[]"#, r#""related_ids":["ghost"]"#);
        let parsed = parse_corpus(line.as_bytes()).unwrap();
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].kind, DiagnosticKind::DanglingRelatedId);
        assert_eq!(parsed.warnings[0].id.as_deref(), Some("e1"));
    }

    fn arb_event() -> impl Strategy<Value = EventRecord> {
        (
            "[a-z0-9]{1,8}",
            "[A-Za-z ]{0,20}[A-Za-z]",
            "[ -~]{0,40}",
            "[A-Za-z, ]{0,20}",
            -90.0f64..=90.0,
            -180.0f64..=180.0,
            0i64..40_000,
            proptest::collection::vec("[A-Za-z /-]{1,12}", 0..3),
            proptest::collection::vec("[a-z0-9]{1,8}", 0..3),
        )
            .prop_map(
                |(id, title, summary, loc, lat, lon, day, cats, rel)| EventRecord {
                    id,
                    title,
                    summary,
                    location_name: loc,
                    latitude: lat,
                    longitude: lon,
                    date: NaiveDate::from_ymd_opt(1950, 1, 1).unwrap()
                        + chrono::Duration::days(day),
                    categories: cats,
                    related_ids: rel,
                },
            )
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(events in proptest::collection::vec(arb_event(), 0..8)) {
            let mut seen = HashSet::new();
            let events: Vec<_> = events.into_iter().filter(|e| seen.insert(e.id.clone())).collect();
            let corpus = Corpus::from_events(events.clone()).unwrap();
            let mut buf = Vec::new();
            write_corpus(&corpus, &mut buf).unwrap();
            let parsed = parse_corpus(buf.as_slice()).unwrap();
            prop_assert_eq!(parsed.corpus.events(), events.as_slice());
        }
    }
}
