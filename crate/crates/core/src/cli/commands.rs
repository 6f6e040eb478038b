use std::fs;
use std::io::BufReader;
use std::path::Path;

use serde_json::{json, Value};

use super::config::RunConfig;
use super::CliError;
use crate::eval::{
    ablation, grid_search_weights, render_table, synth_with, EvalContext, Judgments, SynthConfig,
    DEFAULT_CUTOFFS,
};
use crate::event::{build_structured_text, parse_corpus, write_corpus, Corpus, Diagnostic};
use crate::geojson::rerank_geojson;
use crate::gtr::{rerank_candidates, Feature, GtrParams};
use crate::providers::Provider;
use crate::retrieval::{dense_retrieve, tokenize, Bm25Index, Bm25Params, DenseIndex};

/// Parsed corpus plus its warnings.
pub struct Loaded {
    pub corpus: Corpus,
    pub warnings: Vec<Diagnostic>,
}

pub fn load_corpus(config: &RunConfig) -> Result<Loaded, CliError> {
    let file = fs::File::open(&config.corpus).map_err(|e| CliError::Data {
        message: format!("cannot read corpus {}: {e}", config.corpus.display()),
        diagnostics: Vec::new(),
    })?;
    let parsed = parse_corpus(BufReader::new(file))?;
    Ok(Loaded {
        corpus: parsed.corpus,
        warnings: parsed.warnings,
    })
}

fn provider(config: &RunConfig) -> Result<Provider, CliError> {
    Ok(Provider::from_config(&config.provider_config())?)
}

fn judgments(config: &RunConfig, corpus: &Corpus) -> Result<Judgments, CliError> {
    let judgments = match &config.judgments {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| {
                CliError::Usage(format!("cannot read judgments {}: {e}", path.display()))
            })?;
            Judgments::load_jsonl(BufReader::new(file), corpus)?
        }
        None => Judgments::from_corpus(corpus, config.symmetrize),
    };
    if judgments.evaluable_queries().is_empty() {
        return Err(CliError::Data {
            message: "no judged queries with relevant events".into(),
            diagnostics: Vec::new(),
        });
    }
    Ok(judgments)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<String, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path.display().to_string())
}

fn manifest(config: &RunConfig, provider: &Provider, corpus: &Corpus, params: &GtrParams) -> Value {
    json!({
        "corpus": config.corpus.display().to_string(),
        "n_z": corpus.len(),
        "seed": config.seed,
        "segment_spec": config.segments.label(),
        "judgments": match &config.judgments {
            Some(p) => json!({"source": p.display().to_string()}),
            None => json!({"source": "related_ids", "symmetrized": config.symmetrize}),
        },
        "provider": provider.manifest(),
        "params": params,
    })
}

pub fn cmd_ingest(config: &RunConfig) -> Result<Value, CliError> {
    let loaded = load_corpus(config)?;
    let n_z = loaded.corpus.len();
    let mut report = format!("N_z={n_z}\n");
    for w in &loaded.warnings {
        report.push_str(&format!("warning line {}: {}\n", w.line, w.message));
    }
    let report_path = write_text(&config.output_dir, "ingest_report.txt", &report)?;
    Ok(json!({
        "status": "ok",
        "n_z": n_z,
        "summary": format!("N_z={n_z}"),
        "warnings": loaded.warnings,
        "report": report_path,
    }))
}

pub fn cmd_embed(config: &RunConfig) -> Result<Value, CliError> {
    let loaded = load_corpus(config)?;
    let provider = provider(config)?;
    let index = DenseIndex::build(&loaded.corpus, &config.segments, &provider)?;
    index.save(&config.index_dir(), &loaded.corpus)?;
    let stats = provider.stats();
    Ok(json!({
        "status": "ok",
        "events": loaded.corpus.len(),
        "dimension": index.dimension(),
        "computed": stats.embeddings_computed,
        "cache_hits": stats.embedding_cache_hits,
        "index": index.manifest(),
        "index_dir": config.index_dir().display().to_string(),
    }))
}

/// Dense or BM25 top-k for one query.
pub fn cmd_retrieve(
    config: &RunConfig,
    query_id: &str,
    bm25: bool,
    k: Option<usize>,
) -> Result<Value, CliError> {
    let loaded = load_corpus(config)?;
    let query = loaded
        .corpus
        .get(query_id)
        .ok_or_else(|| CliError::unknown_query(query_id))?;
    let k = k.unwrap_or(config.gtr.n_retrieve);
    let candidates = if bm25 {
        let index = Bm25Index::build(
            loaded
                .corpus
                .iter()
                .map(|e| (e.id.clone(), build_structured_text(e, &config.segments))),
            Bm25Params::default(),
        );
        index.top_k(
            &tokenize(&build_structured_text(query, &config.segments)),
            k,
            Some(query_id),
        )
    } else {
        let provider = provider(config)?;
        let index = DenseIndex::build(&loaded.corpus, &config.segments, &provider)?;
        dense_retrieve(query, &index, &config.segments, k, &provider)?.candidates
    };
    Ok(json!({
        "query_id": query_id,
        "method": if bm25 { "bm25" } else { "dense" },
        "candidates": candidates,
    }))
}

pub fn cmd_rerank(
    config: &RunConfig,
    query_id: &str,
    features: Option<&[Feature]>,
    geojson: Option<&Path>,
) -> Result<Value, CliError> {
    let loaded = load_corpus(config)?;
    let query = loaded
        .corpus
        .get(query_id)
        .ok_or_else(|| CliError::unknown_query(query_id))?;
    let mut params = config.gtr.clone();
    if let Some(f) = features {
        params = params.with_features(f.iter().copied());
    }
    params
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let provider = provider(config)?;
    let index = DenseIndex::build(&loaded.corpus, &config.segments, &provider)?;
    let retrieved = dense_retrieve(
        query,
        &index,
        &config.segments,
        params.n_retrieve,
        &provider,
    )?;
    let result = rerank_candidates(query, &loaded.corpus, &retrieved, &params, &provider)?;
    if let Some(path) = geojson {
        let collection = rerank_geojson(query, &result, &loaded.corpus)?;
        let text = serde_json::to_string_pretty(&collection).expect("geojson serializes") + "\n";
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(serde_json::to_value(result).expect("result serializes"))
}

struct Prepared {
    corpus: Corpus,
    judgments: Judgments,
    provider: Provider,
    index: DenseIndex,
}

fn prepare(config: &RunConfig) -> Result<Prepared, CliError> {
    let loaded = load_corpus(config)?;
    let judgments = judgments(config, &loaded.corpus)?;
    let provider = provider(config)?;
    let index = DenseIndex::build(&loaded.corpus, &config.segments, &provider)?;
    Ok(Prepared {
        corpus: loaded.corpus,
        judgments,
        provider,
        index,
    })
}

pub fn cmd_eval(config: &RunConfig, cutoffs: &[usize]) -> Result<Value, CliError> {
    let p = prepare(config)?;
    let ctx = EvalContext::new(
        &p.corpus,
        &p.judgments,
        &p.index,
        &p.provider,
        config.gtr.n_retrieve,
        cutoffs,
    )?;
    let bm25 = ctx.evaluate_bm25(&config.segments, config.gtr.n_retrieve)?;
    let dense = ctx.evaluate_dense()?;
    let gtr = ctx.evaluate_gtr(&config.gtr)?;
    let table = render_table(&[
        ("bm25".into(), &bm25),
        ("dense".into(), &dense),
        ("gt-r".into(), &gtr),
    ]);
    let table_path = write_text(&config.output_dir, "eval_table.txt", &table)?;
    Ok(json!({
        "manifest": manifest(config, &p.provider, &p.corpus, &config.gtr),
        "runs": {"bm25": bm25, "dense": dense, "gt-r": gtr},
        "table": table_path,
    }))
}

pub fn cmd_grid(config: &RunConfig, step: f64) -> Result<Value, CliError> {
    let p = prepare(config)?;
    let ctx = EvalContext::new(
        &p.corpus,
        &p.judgments,
        &p.index,
        &p.provider,
        config.gtr.n_retrieve,
        &DEFAULT_CUTOFFS,
    )?;
    let grid = grid_search_weights(&ctx, &config.gtr, step)?;
    let table_path = write_text(&config.output_dir, "grid_table.txt", &grid.render_table())?;
    Ok(json!({
        "manifest": manifest(config, &p.provider, &p.corpus, &config.gtr),
        "grid": grid,
        "table": table_path,
    }))
}

pub fn cmd_ablate(config: &RunConfig) -> Result<Value, CliError> {
    let p = prepare(config)?;
    let ctx = EvalContext::new(
        &p.corpus,
        &p.judgments,
        &p.index,
        &p.provider,
        config.gtr.n_retrieve,
        &DEFAULT_CUTOFFS,
    )?;
    let params = config.gtr.clone().with_features(Feature::ALL);
    let result = ablation(&ctx, &params)?;
    let table_path = write_text(
        &config.output_dir,
        "ablation_table.txt",
        &result.render_table(),
    )?;
    Ok(json!({
        "manifest": manifest(config, &p.provider, &p.corpus, &params),
        "ablation": result,
        "table": table_path,
    }))
}

pub fn cmd_synth(synth: &SynthConfig, out: &Path) -> Result<Value, CliError> {
    let (corpus, judgments) = synth_with(synth)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let file = fs::File::create(out)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", out.display())))?;
    write_corpus(&corpus, std::io::BufWriter::new(file))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(json!({
        "status": "ok",
        "path": out.display().to_string(),
        "config": synth,
        "n_z": corpus.len(),
        "evaluable_queries": judgments.evaluable_queries().len(),
    }))
}
