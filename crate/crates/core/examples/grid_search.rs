//! Sweeps (w_s, w_c) on the synthetic fixture, once with the semantic signal
//! planted in the text and once with it planted in the category tags.

use geotime_rerank::eval::{
    grid_search_weights, synth_with, EvalContext, PlantedSignal, SynthConfig, DEFAULT_CUTOFFS,
};
use geotime_rerank::event::SegmentSpec;
use geotime_rerank::gtr::GtrParams;
use geotime_rerank::providers::Provider;
use geotime_rerank::retrieval::DenseIndex;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for planted in [PlantedSignal::Semantic, PlantedSignal::Category] {
        let config = SynthConfig {
            planted,
            ..SynthConfig::new(42, 200, 20)
        };
        let (corpus, judgments) = synth_with(&config)?;
        let provider = Provider::mock();
        let index = DenseIndex::build(&corpus, &SegmentSpec::full_prefixed(), &provider)?;
        let ctx = EvalContext::new(
            &corpus,
            &judgments,
            &index,
            &provider,
            100,
            &DEFAULT_CUTOFFS,
        )?;
        let grid = grid_search_weights(&ctx, &GtrParams::default(), 0.1)?;
        let best = grid.best_point();
        println!(
            "planted {planted:?}: best w_s={:.1} w_c={:.1}",
            best.w_s, best.w_c
        );
        println!("{}", grid.render_table());
    }
    Ok(())
}
