//! Command-line surface. [`run`] parses arguments, executes one command and
//! writes a single JSON document to `out`; diagnostics go to `err` as one
//! JSON object per line.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 provider error.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use commands::{
    cmd_ablate, cmd_embed, cmd_eval, cmd_grid, cmd_ingest, cmd_rerank, cmd_retrieve, cmd_synth,
    load_corpus,
};
pub use config::{apply_override, RunConfig};

use crate::eval::{EvalError, PlantedSignal, SynthConfig, DEFAULT_CUTOFFS};
use crate::event::{CorpusError, Diagnostic};
use crate::gtr::{Feature, GtrError};
use crate::providers::ProviderError;
use crate::retrieval::RetrievalError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{message}")]
    Data {
        message: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("{0}")]
    Provider(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data { .. } => 2,
            CliError::Provider(_) => 3,
        }
    }

    fn data(message: impl Into<String>) -> Self {
        CliError::Data {
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub(crate) fn unknown_query(id: &str) -> Self {
        Self::data(format!("unknown query id `{id}`"))
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Invalid(diagnostics) => CliError::Data {
                message: format!("corpus has {} invalid line(s)", diagnostics.len()),
                diagnostics,
            },
            other => Self::data(other.to_string()),
        }
    }
}

impl From<ProviderError> for CliError {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::Config(m) => CliError::Usage(m),
            other => CliError::Provider(other.to_string()),
        }
    }
}

impl From<RetrievalError> for CliError {
    fn from(e: RetrievalError) -> Self {
        match e {
            RetrievalError::Provider(p) => p.into(),
            other => Self::data(other.to_string()),
        }
    }
}

impl From<GtrError> for CliError {
    fn from(e: GtrError) -> Self {
        match e {
            GtrError::Provider(p) => p.into(),
            GtrError::Retrieval(r) => r.into(),
            GtrError::InvalidParams(m) => CliError::Usage(m),
            other => Self::data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Gtr(g) => g.into(),
            EvalError::Retrieval(r) => r.into(),
            EvalError::InvalidStep(_) => CliError::Usage(e.to_string()),
            other => Self::data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "geotime",
    version,
    about = "Dense retrieval and geo-time re-ranking over event corpora"
)]
pub struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Config override such as `gtr.tau_d=300`; repeatable.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Shorthand for `--param corpus=PATH`.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Shorthand for `--param output_dir=DIR`.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for per-query work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Dense,
    Bm25,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Planted {
    Semantic,
    Category,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the corpus and report N_z.
    Ingest,
    /// Embed every event's structured text and save the dense index.
    Embed,
    /// Stage-1 candidates for one query.
    Retrieve {
        #[arg(long)]
        query: String,
        #[arg(long, value_enum, default_value = "dense")]
        method: Method,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Re-rank one query's candidates.
    Rerank {
        #[arg(long)]
        query: String,
        /// Comma-separated subset of semantic,category,distance,latitude,temporal.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<Feature>>,
        /// Also write a GeoJSON FeatureCollection here.
        #[arg(long)]
        geojson: Option<PathBuf>,
    },
    /// BM25, dense and GT-R metrics over every judged query.
    Eval {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CUTOFFS)]
        cutoffs: Vec<usize>,
    },
    /// Sweep (w_s, w_c) pairs summing to one.
    GridSearch {
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Baseline plus single-feature removals.
    Ablate,
    /// Write a seeded synthetic corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        events: usize,
        #[arg(long, default_value_t = 20)]
        clusters: usize,
        #[arg(long, value_enum, default_value = "semantic")]
        planted: Planted,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut overrides = Vec::new();
    if let Some(c) = &cli.corpus {
        overrides.push(format!("corpus={}", Value::String(c.display().to_string())));
    }
    if let Some(o) = &cli.output {
        overrides.push(format!(
            "output_dir={}",
            Value::String(o.display().to_string())
        ));
    }
    overrides.extend(cli.params.iter().cloned());
    RunConfig::load(cli.config.as_deref(), &overrides)
}

fn dispatch(cli: &Cli) -> Result<Value, CliError> {
    let config = load_config(cli)?;
    if let Command::Synth {
        out,
        seed,
        events,
        clusters,
        planted,
    } = &cli.command
    {
        let synth = SynthConfig {
            planted: match planted {
                Planted::Semantic => PlantedSignal::Semantic,
                Planted::Category => PlantedSignal::Category,
            },
            ..SynthConfig::new(seed.unwrap_or(config.seed), *events, *clusters)
        };
        return cmd_synth(&synth, out);
    }
    config.check_inputs()?;
    match &cli.command {
        Command::Ingest => cmd_ingest(&config),
        Command::Embed => cmd_embed(&config),
        Command::Retrieve { query, method, k } => {
            cmd_retrieve(&config, query, matches!(method, Method::Bm25), *k)
        }
        Command::Rerank {
            query,
            features,
            geojson,
        } => cmd_rerank(&config, query, features.as_deref(), geojson.as_deref()),
        Command::Eval { cutoffs } => cmd_eval(&config, cutoffs),
        Command::GridSearch { step } => cmd_grid(&config, *step),
        Command::Ablate => cmd_ablate(&config),
        Command::Synth { .. } => unreachable!("handled above"),
    }
}

fn emit_line(err: &mut dyn Write, value: &Value) {
    let _ = writeln!(err, "{value}");
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            emit_line(
                err,
                &json!({"level": "error", "message": e.to_string().trim_end()}),
            );
            let _ = writeln!(
                out,
                "{}",
                json!({"status": "error", "exit_code": 1, "error": e.kind().to_string()})
            );
            return 1;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            emit_line(err, &json!({"level": "error", "message": e.to_string()}));
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(value) => {
            if let Some(warnings) = value.get("warnings").and_then(Value::as_array) {
                for w in warnings {
                    emit_line(err, &json!({"level": "warning", "diagnostic": w}));
                }
            }
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&value).expect("output serializes")
            );
            0
        }
        Err(e) => {
            let code = e.exit_code();
            let diagnostics = match &e {
                CliError::Data { diagnostics, .. } => diagnostics.clone(),
                _ => Vec::new(),
            };
            for d in &diagnostics {
                emit_line(err, &json!({"level": "error", "diagnostic": d}));
            }
            emit_line(err, &json!({"level": "error", "message": e.to_string()}));
            let doc = json!({"status": "error", "exit_code": code, "error": e.to_string(), "diagnostics": diagnostics});
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&doc).expect("error serializes")
            );
            code
        }
    }
}
