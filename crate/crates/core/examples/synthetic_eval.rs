//! BM25, dense and GT-R on the seeded synthetic fixture.
//!
//! `cargo run --release --example synthetic_eval -- 7` picks another seed.

use geotime_rerank::eval::{render_table, synth_corpus, EvalContext, DEFAULT_CUTOFFS};
use geotime_rerank::event::SegmentSpec;
use geotime_rerank::gtr::GtrParams;
use geotime_rerank::providers::Provider;
use geotime_rerank::retrieval::DenseIndex;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(42);
    let (corpus, judgments) = synth_corpus(seed, 200, 20)?;
    let spec = SegmentSpec::full_prefixed();
    let provider = Provider::mock();
    let index = DenseIndex::build(&corpus, &spec, &provider)?;
    let params = GtrParams::default();
    let ctx = EvalContext::new(
        &corpus,
        &judgments,
        &index,
        &provider,
        params.n_retrieve,
        &DEFAULT_CUTOFFS,
    )?;

    let bm25 = ctx.evaluate_bm25(&spec, params.n_retrieve)?;
    let dense = ctx.evaluate_dense()?;
    let gtr = ctx.evaluate_gtr(&params)?;
    println!(
        "seed {seed}: {} events, {} judged queries",
        corpus.len(),
        gtr.evaluated_queries
    );
    print!(
        "{}",
        render_table(&[
            ("bm25".into(), &bm25),
            ("dense".into(), &dense),
            ("gt-r".into(), &gtr),
        ])
    );
    Ok(())
}
