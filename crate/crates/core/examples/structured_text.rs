//! Parses the Kodiak fixture and prints the embedder input for one event
//! under a few segment layouts.

use std::fs::File;
use std::io::BufReader;

use geotime_rerank::event::{build_structured_text, parse_corpus, SegmentSpec};

const KODIAK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/kodiak.jsonl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let parsed = parse_corpus(BufReader::new(File::open(KODIAK)?))?;
    println!(
        "N_z={} ({} warnings)",
        parsed.corpus.len(),
        parsed.warnings.len()
    );

    let query = parsed
        .corpus
        .get("kodiak-q")
        .expect("fixture has the query");
    for (list, prefixed) in [
        ("title,summary,location,date", true),
        ("title,summary,location,date", false),
        ("title,location", true),
    ] {
        let spec = SegmentSpec::parse_list(list, prefixed)?;
        println!("\n[{}]", spec.label());
        println!("{}", build_structured_text(query, &spec));
    }
    Ok(())
}
