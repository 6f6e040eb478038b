//! Embeddings and category-instructed entity extraction against any
//! OpenAI-compatible server.
//!
//! ```text
//! export OPENAI_API_KEY=...
//! cargo run --example openai_provider -- https://api.openai.com text-embedding-3-small gpt-4o-mini
//! ```
//!
//! Responses are cached under `./provider-cache`, so a second run is offline.

use geotime_rerank::providers::{Provider, ProviderConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [endpoint, embedding_model, chat_model] = args.as_slice() else {
        eprintln!("usage: openai_provider <endpoint> <embedding-model> <chat-model>");
        std::process::exit(1);
    };
    if std::env::var("OPENAI_API_KEY").is_err() {
        eprintln!("set OPENAI_API_KEY first");
        std::process::exit(1);
    }

    let mut config = ProviderConfig::http(endpoint, "OPENAI_API_KEY", embedding_model, chat_model);
    config.cache_dir = Some("provider-cache".into());
    config.batch_size = 16;
    let provider = Provider::from_config(&config)?;
    println!("{:?}", provider.manifest());

    let texts = [
        "Humpback found dead near Kodiak gets Alaska's first 2023 whale necropsy",
        "Sitka team conducts first humpback whale necropsy in 5 years",
    ]
    .map(String::from);
    let vectors = provider.embed_batch(&texts)?;
    println!(
        "{} vectors of dimension {}",
        vectors.len(),
        vectors[0].dimension()
    );

    let tags = ["Marine Mammals", "Death / Die-off / Decline"].map(String::from);
    let a = provider.extract_entities(&texts[0], &tags)?;
    let b = provider.extract_entities(&texts[1], &tags)?;
    println!("{}\n{}", a.rendered(), b.rendered());
    println!(
        "category similarity {:.4}",
        provider.cross_score(a.rendered(), b.rendered())?
    );
    println!("{:?}", provider.stats());
    Ok(())
}
