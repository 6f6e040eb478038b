//! Two-stage retrieval of similar spatiotemporal events.
//!
//! Stage 1 embeds a structured text view of every event and takes the
//! cosine top-k for a query. Stage 2 re-ranks those candidates by fusing
//! five rankings (semantic, category, distance, latitude, temporal) with
//! reciprocal rank fusion.
//!
//! ```no_run
//! use geotime_rerank::event::{parse_corpus, SegmentSpec};
//! use geotime_rerank::gtr::{gtr_rerank, GtrParams};
//! use geotime_rerank::providers::Provider;
//! use geotime_rerank::retrieval::DenseIndex;
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let file = std::io::BufReader::new(std::fs::File::open("events.jsonl")?);
//! let corpus = parse_corpus(file)?.corpus;
//! let provider = Provider::mock();
//! let index = DenseIndex::build(&corpus, &SegmentSpec::full_prefixed(), &provider)?;
//! let query = corpus.get("e1").unwrap();
//! let result = gtr_rerank(query, &corpus, &index, &GtrParams::default(), &provider)?;
//! println!("{:?}", result.reranked);
//! # Ok(())
//! # }
//! ```
//!
//! Modules:
//! - [`event`]: corpus records, JSONL parsing, structured text
//! - [`providers`]: embeddings, cross scores and entity extraction (mock or HTTP), with a cache
//! - [`retrieval`]: BM25 and dense stage-1 retrieval
//! - [`gtr`]: feature rankings and fusion
//! - [`eval`]: metrics, judgments, grid search, ablation, synthetic fixtures
//! - [`geojson`]: map output for a re-ranked query
//! - [`cli`]: the `geotime` command

pub mod cli;
pub mod eval;
pub mod event;
pub mod geojson;
pub mod gtr;
pub mod providers;
pub mod retrieval;
