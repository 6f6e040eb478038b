use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use geotime_rerank::cli;
use serde_json::Value;

const KODIAK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/kodiak.jsonl");

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Output {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn run(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("geotime").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the seed-42 synthetic corpus into `dir`.
fn synth(dir: &Path) -> PathBuf {
    let path = dir.join("synth.jsonl");
    let o = run(&["synth", "--out", s(&path), "--seed", "42"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(o.json()["n_z"], 200);
    path
}

#[test]
fn ingest_reports_event_count() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let out = dir.path().join("out");
    let o = run(&["ingest", "--corpus", s(&corpus), "--output", s(&out)]);
    assert_eq!(o.code, 0);
    assert_eq!(o.json()["summary"], "N_z=200");
    let report = std::fs::read_to_string(out.join("ingest_report.txt")).unwrap();
    assert!(report.contains("N_z=200"));
}

#[test]
fn ingest_rejects_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.jsonl");
    let good = std::fs::read_to_string(KODIAK).unwrap();
    let mut lines: Vec<&str> = good.lines().take(3).collect();
    lines.insert(
        1,
        r#"{"id":"broken","title":"x","latitude":95.0,"longitude":0,"date":"2020-01-01"}"#,
    );
    std::fs::write(&corpus, lines.join("\n")).unwrap();
    let o = run(&["ingest", "--corpus", s(&corpus), "--output", s(dir.path())]);
    assert_eq!(o.code, 2);
    let doc = o.json();
    assert_eq!(doc["status"], "error");
    assert_eq!(doc["exit_code"], 2);
    assert_eq!(doc["diagnostics"][0]["line"], 2);
    assert!(o.stderr.contains("\"line\":2"), "{}", o.stderr);
}

#[test]
fn ingest_empty_file_warns() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.jsonl");
    std::fs::write(&corpus, "").unwrap();
    let o = run(&["ingest", "--corpus", s(&corpus), "--output", s(dir.path())]);
    assert_eq!(o.code, 0);
    let doc = o.json();
    assert_eq!(doc["n_z"], 0);
    assert_eq!(doc["warnings"].as_array().unwrap().len(), 1);
    assert!(o.stderr.contains("warning"));
}

#[test]
fn embed_is_idempotent_on_warm_cache() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let out = dir.path().join("out");
    let args = ["embed", "--corpus", s(&corpus), "--output", s(&out)];
    let cold = run(&args).json();
    assert_eq!(cold["events"], 200);
    assert_eq!(cold["dimension"], 256);
    assert_eq!(cold["computed"], 200);
    let warm = run(&args).json();
    assert_eq!(warm["computed"], 0);
    assert_eq!(warm["cache_hits"], 200);
    assert!(out.join("index").join("dense_index.jsonl").exists());

    let narrower = run(&[
        "embed",
        "--corpus",
        s(&corpus),
        "--output",
        s(&out),
        "--param",
        r#"segments={"segments":["title","summary"],"with_prefix":true}"#,
    ]);
    assert_eq!(narrower.code, 0, "{}", narrower.stdout);
    assert_eq!(narrower.json()["computed"], 200);
}

#[test]
fn kodiak_rerank_with_geojson() {
    let dir = tempfile::tempdir().unwrap();
    let geojson = dir.path().join("kodiak.geojson");
    let o = run(&[
        "rerank",
        "--corpus",
        KODIAK,
        "--output",
        s(dir.path()),
        "--query",
        "kodiak-q",
        "--geojson",
        s(&geojson),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let result = o.json();
    let top: Vec<&str> = result["reranked"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(top.len(), 10);
    for hit in ["kodiak-01", "kodiak-03", "kodiak-05"] {
        assert!(top.contains(&hit), "{hit} missing from {top:?}");
    }

    let collection: Value =
        serde_json::from_str(&std::fs::read_to_string(&geojson).unwrap()).unwrap();
    let mut roles: BTreeMap<String, usize> = BTreeMap::new();
    for f in collection["features"].as_array().unwrap() {
        *roles
            .entry(f["properties"]["role"].as_str().unwrap().into())
            .or_default() += 1;
    }
    let expected: BTreeMap<String, usize> = [
        ("query", 1),
        ("candidate", 10),
        ("link", 10),
        ("distance_threshold", 1),
        ("latitude_band", 2),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    assert_eq!(roles, expected);
}

#[test]
fn semantic_only_rerank_matches_retrieval() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--corpus", KODIAK, "--output", s(dir.path())];
    let retrieve = run(&[&["retrieve", "--query", "kodiak-q", "--k", "10"], &base[..]].concat());
    let retrieved: Vec<Value> = retrieve.json()["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].clone())
        .collect();
    let rerank = run(&[
        &[
            "rerank",
            "--query",
            "kodiak-q",
            "--features",
            "semantic",
            "--param",
            "gtr.w_s=1",
        ],
        &base[..],
    ]
    .concat());
    assert_eq!(rerank.code, 0, "{}", rerank.stdout);
    assert_eq!(rerank.json()["reranked"].as_array().unwrap(), &retrieved);

    let bm25 = run(&[
        &["retrieve", "--query", "kodiak-q", "--method", "bm25"],
        &base[..],
    ]
    .concat());
    assert_eq!(bm25.json()["method"], "bm25");
}

#[test]
fn unknown_query_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "rerank",
        "--corpus",
        KODIAK,
        "--output",
        s(dir.path()),
        "--query",
        "no-such-event",
    ]);
    assert_eq!(o.code, 2);
    assert!(o.json()["error"]
        .as_str()
        .unwrap()
        .contains("no-such-event"));
    assert!(o.stderr.contains("no-such-event"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).code, 1);
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(run(&["ingest", "--corpus", s(&missing)]).code, 1);
    let bad = run(&["ingest", "--corpus", KODIAK, "--param", "gtr.beta_d=0"]);
    assert_eq!(bad.code, 1);
    assert!(bad.json()["error"].as_str().unwrap().contains("beta_d"));
    assert_eq!(
        run(&["grid-search", "--corpus", KODIAK, "--step", "0.3"]).code,
        1
    );
}

#[test]
fn unreachable_provider_exits_three() {
    std::env::set_var("GEOTIME_CLI_TEST_KEY", "sk-test");
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "corpus": KODIAK,
            "output_dir": dir.path(),
            "provider": {
                "kind": "http",
                "endpoint": format!("http://127.0.0.1:{port}"),
                "api_key_env": "GEOTIME_CLI_TEST_KEY",
                "retries": 0,
            },
        })
        .to_string(),
    )
    .unwrap();
    let o = run(&["embed", "--config", s(&config)]);
    assert_eq!(o.code, 3, "{}", o.stdout);
}

#[test]
fn eval_grid_and_ablation_tables() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let out = dir.path().join("out");
    let base = ["--corpus", s(&corpus), "--output", s(&out)];

    let started = Instant::now();
    let eval = run(&[&["eval"], &base[..]].concat());
    assert_eq!(eval.code, 0, "{}", eval.stderr);
    assert!(started.elapsed().as_secs_f64() < 10.0);
    let doc = eval.json();
    for run in ["bm25", "dense", "gt-r"] {
        assert_eq!(
            doc["runs"][run]["cutoffs"],
            serde_json::json!([1, 3, 10, 100])
        );
    }
    assert_eq!(doc["manifest"]["n_z"], 200);
    let table = std::fs::read_to_string(out.join("eval_table.txt")).unwrap();
    assert_eq!(table.lines().count(), 4);

    let single = run(&[&["eval", "--jobs", "1"], &base[..]].concat());
    assert_eq!(single.stdout, eval.stdout);

    let grid = run(&[&["grid-search"], &base[..]].concat());
    assert_eq!(grid.code, 0);
    assert_eq!(grid.json()["grid"]["points"].as_array().unwrap().len(), 11);
    let grid_table = std::fs::read_to_string(out.join("grid_table.txt")).unwrap();
    assert_eq!(grid_table.lines().count(), 12);

    let ablate = run(&[&["ablate"], &base[..]].concat());
    assert_eq!(ablate.code, 0);
    let rows = ablate.json()["ablation"]["rows"].clone();
    let names: Vec<&str> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["removed"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["none", "latitude", "temporal", "distance", "category", "semantic"]
    );
    let ablation_table = std::fs::read_to_string(out.join("ablation_table.txt")).unwrap();
    assert_eq!(ablation_table.lines().count(), 7);
}
