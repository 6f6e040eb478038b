//! Okapi BM25 over the structured text of every fixture event.

use std::fs::File;
use std::io::BufReader;

use geotime_rerank::event::{build_structured_text, parse_corpus, SegmentSpec};
use geotime_rerank::retrieval::{tokenize, Bm25Index, Bm25Params};

const KODIAK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/kodiak.jsonl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = parse_corpus(BufReader::new(File::open(KODIAK)?))?.corpus;
    let spec = SegmentSpec::full_prefixed();
    let index = Bm25Index::build(
        corpus
            .iter()
            .map(|e| (e.id.clone(), build_structured_text(e, &spec))),
        Bm25Params::default(),
    );
    println!(
        "{} documents, avg length {:.1} tokens",
        index.len(),
        index.avg_doc_len()
    );

    let query = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "dead humpback whale necropsy".into());
    let tokens = tokenize(&query);
    for t in &tokens {
        println!("  idf({t}) = {:.3}", index.idf(t));
    }
    for (rank, hit) in index.top_k(&tokens, 5, None).iter().enumerate() {
        let title = &corpus.get(&hit.id).unwrap().title;
        println!("{:>2}. {:>7.3}  {title}", rank + 1, hit.score);
    }
    Ok(())
}
