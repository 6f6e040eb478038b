//! The offline embedder: feature-hashed unigrams and trigrams, L2-normalized.

use geotime_rerank::providers::{mock_embed, Provider};
use geotime_rerank::retrieval::cosine_similarity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let anchor = "dead humpback whale";
    let others = [
        "dead humpback whales",
        "humpback whale necropsy in Sitka",
        "beluga found dead near Girdwood",
        "road construction budget",
    ];

    let v = mock_embed(anchor);
    println!("dimension {}, norm {:.12}", v.dimension(), v.norm());
    for text in others {
        let s = cosine_similarity(&v, &mock_embed(text))?;
        println!("{s:>7.4}  {anchor:?} vs {text:?}");
    }

    // Through the provider, repeated texts are embedded once.
    let provider = Provider::mock();
    let batch: Vec<String> = [anchor, anchor, others[0]].map(String::from).to_vec();
    provider.embed_batch(&batch)?;
    let stats = provider.stats();
    println!(
        "batch of {}: {} computed, {} cache hits",
        batch.len(),
        stats.embeddings_computed,
        stats.embedding_cache_hits
    );
    println!(
        "cross score {:.4}",
        provider.cross_score(
            "Category: Marine Mammals; Entities: humpback whale.",
            "Category: Marine Mammals; Entities: gray whale."
        )?
    );
    Ok(())
}
