//! Stage 1: cosine top-k against a dense index built with the mock provider.

use std::fs::File;
use std::io::BufReader;

use geotime_rerank::event::{parse_corpus, SegmentSpec};
use geotime_rerank::providers::Provider;
use geotime_rerank::retrieval::{dense_retrieve, DenseIndex};

const KODIAK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/kodiak.jsonl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = parse_corpus(BufReader::new(File::open(KODIAK)?))?.corpus;
    let provider = Provider::mock();
    let spec = SegmentSpec::full_prefixed();
    let index = DenseIndex::build(&corpus, &spec, &provider)?;
    println!("{:?}", index.manifest());

    let query = corpus.get("kodiak-q").unwrap();
    let retrieved = dense_retrieve(query, &index, &spec, 10, &provider)?;
    println!("\n{}", query.title);
    for (rank, c) in retrieved.candidates.iter().enumerate() {
        let event = corpus.get(&c.id).unwrap();
        println!(
            "{:>2}. {:.4}  {} ({})",
            rank + 1,
            c.score,
            event.title,
            event.location_name
        );
    }

    // The saved index is plain JSONL plus a manifest.
    let dir = std::env::temp_dir().join("geotime-dense-example");
    index.save(&dir, &corpus)?;
    let reloaded = DenseIndex::load(&dir)?;
    assert_eq!(reloaded.manifest(), index.manifest());
    println!(
        "\nsaved and reloaded {} vectors from {}",
        reloaded.len(),
        dir.display()
    );
    Ok(())
}
