//! Geo-time re-ranking of the dead-humpback query, with the per-feature
//! ranks that produced each fused score.

use std::fs::File;
use std::io::BufReader;

use geotime_rerank::event::{parse_corpus, SegmentSpec};
use geotime_rerank::gtr::{gtr_rerank, GtrParams};
use geotime_rerank::providers::Provider;
use geotime_rerank::retrieval::DenseIndex;

const KODIAK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/kodiak.jsonl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = parse_corpus(BufReader::new(File::open(KODIAK)?))?.corpus;
    let provider = Provider::mock();
    let index = DenseIndex::build(&corpus, &SegmentSpec::full_prefixed(), &provider)?;
    let query = corpus.get("kodiak-q").unwrap();
    let params = GtrParams::default();
    let result = gtr_rerank(query, &corpus, &index, &params, &provider)?;

    println!(
        "query: {} ({}, {})",
        query.title, query.location_name, query.date
    );
    println!(
        "{:>4} {:>8} {:>5} {:>5} {:>8} {:>5} {:>5}  {:<4} title",
        "rank", "rrf", "sem", "cat", "km", "lat", "days", "hit"
    );
    for c in result.candidates.iter().take(params.n_rerank) {
        let f = &c.features;
        let event = corpus.get(&c.id).unwrap();
        let hit = query.related_ids.contains(&c.id);
        println!(
            "{:>4} {:>8.5} {:>5} {:>5} {:>8.1} {:>5.1} {:>5}  {:<4} {}",
            c.final_rank,
            c.rrf_score,
            f.semantic.as_ref().map_or(0, |s| s.raw),
            f.category.as_ref().map_or(0, |s| s.raw),
            f.distance.as_ref().map_or(f64::NAN, |d| d.km),
            f.latitude.as_ref().map_or(f64::NAN, |l| l.deg),
            f.temporal.as_ref().map_or(0, |t| t.days),
            if hit { "hit" } else { "" },
            event.title
        );
    }
    Ok(())
}
