//! Removes one re-ranking feature at a time and reports the nDCG@10 drop.

use geotime_rerank::eval::{ablation, synth_corpus, EvalContext, Metric, DEFAULT_CUTOFFS};
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
    let provider = Provider::mock();
    let index = DenseIndex::build(&corpus, &SegmentSpec::full_prefixed(), &provider)?;
    let params = GtrParams::default();
    let ctx = EvalContext::new(
        &corpus,
        &judgments,
        &index,
        &provider,
        params.n_retrieve,
        &DEFAULT_CUTOFFS,
    )?;

    let dense = ctx.evaluate_dense()?;
    let result = ablation(&ctx, &params)?;
    println!("dense nDCG@10 {:.2}", dense.value(Metric::Ndcg, 10));
    print!("{}", result.render_table());

    let worst = result
        .rows
        .iter()
        .skip(1)
        .max_by(|a, b| a.deltas["nDCG@10"].total_cmp(&b.deltas["nDCG@10"]))
        .unwrap();
    println!("largest drop without {}", worst.removed);
    Ok(())
}
