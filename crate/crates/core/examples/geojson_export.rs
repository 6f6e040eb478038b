//! Writes the Kodiak re-ranking as a GeoJSON FeatureCollection: query point,
//! top candidates, links, the distance ring and the latitude band.
//!
//! Pass an output path, or it goes to the system temp directory.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use geotime_rerank::event::{parse_corpus, SegmentSpec};
use geotime_rerank::geojson::rerank_geojson;
use geotime_rerank::gtr::{gtr_rerank, GtrParams};
use geotime_rerank::providers::Provider;
use geotime_rerank::retrieval::DenseIndex;

const KODIAK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/kodiak.jsonl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("kodiak.geojson"));
    let corpus = parse_corpus(BufReader::new(File::open(KODIAK)?))?.corpus;
    let provider = Provider::mock();
    let index = DenseIndex::build(&corpus, &SegmentSpec::full_prefixed(), &provider)?;
    let query = corpus.get("kodiak-q").unwrap();
    let result = gtr_rerank(query, &corpus, &index, &GtrParams::default(), &provider)?;

    let collection = rerank_geojson(query, &result, &corpus)?;
    std::fs::write(&out, serde_json::to_string_pretty(&collection)?)?;
    for f in collection["features"].as_array().unwrap() {
        let p = &f["properties"];
        if p["role"] == "candidate" {
            println!(
                "#{:<2} {:>7.1} km  {}",
                p["rank"],
                p["distance_km"].as_f64().unwrap_or(f64::NAN),
                p["title"].as_str().unwrap_or_default()
            );
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
