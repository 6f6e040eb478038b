use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use geotime_rerank::providers::{
    CategorySnippet, CrossMode, Entity, Provider, ProviderConfig, ProviderError,
};
use serde_json::{json, Value};

const KEY_VAR: &str = "GEOTIME_TEST_API_KEY";

#[derive(Debug, Clone)]
struct Request {
    path: String,
    auth: Option<String>,
    body: Value,
}

type Handler = dyn Fn(&Request, usize) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server: one request per connection, scripted replies.
struct Stub {
    endpoint: String,
    log: Arc<Mutex<Vec<Request>>>,
}

impl Stub {
    fn start(handler: impl Fn(&Request, usize) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let endpoint = format!("http://{}", listener.local_addr().unwrap());
        let log = Arc::new(Mutex::new(Vec::new()));
        let handler: Arc<Handler> = Arc::new(handler);
        let shared = Arc::clone(&log);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { break };
                let log = Arc::clone(&shared);
                let handler = Arc::clone(&handler);
                thread::spawn(move || serve(stream, &log, &*handler));
            }
        });
        Stub { endpoint, log }
    }

    fn requests(&self) -> Vec<Request> {
        self.log.lock().unwrap().clone()
    }

    fn count(&self, path: &str) -> usize {
        self.requests().iter().filter(|r| r.path == path).count()
    }

    fn config(&self) -> ProviderConfig {
        std::env::set_var(KEY_VAR, "sk-test");
        let mut c = ProviderConfig::http(&self.endpoint, KEY_VAR, "embed-small", "chat-large");
        c.backoff_ms = 1;
        c
    }
}

fn serve(stream: TcpStream, log: &Mutex<Vec<Request>>, handler: &Handler) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut start = String::new();
    if reader.read_line(&mut start).is_err() {
        return;
    }
    let path = start.split_whitespace().nth(1).unwrap_or("").to_string();
    let (mut len, mut auth) = (0usize, None);
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        let (name, value) = line.split_once(':').unwrap();
        match name.to_ascii_lowercase().as_str() {
            "content-length" => len = value.trim().parse().unwrap(),
            "authorization" => auth = Some(value.trim().to_string()),
            _ => {}
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    let request = Request {
        path,
        auth,
        body: serde_json::from_slice(&body).unwrap_or(Value::Null),
    };
    let nth = {
        let mut log = log.lock().unwrap();
        log.push(request.clone());
        log.iter().filter(|r| r.path == request.path).count() - 1
    };
    let (status, text) = handler(&request, nth);
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
        text.len()
    );
}

/// Deterministic 3-d vector from the text length.
fn fake_vector(text: &str) -> Vec<f64> {
    let n = text.len() as f64;
    vec![1.0, n, n * n]
}

fn embeddings_reply(req: &Request, reverse: bool) -> String {
    let inputs = req.body["input"].as_array().unwrap();
    let mut data: Vec<Value> = inputs
        .iter()
        .enumerate()
        .map(|(i, t)| json!({"index": i, "embedding": fake_vector(t.as_str().unwrap())}))
        .collect();
    if reverse {
        data.reverse();
    }
    json!({ "data": data }).to_string()
}

fn chat_reply(content: &str) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
}

fn texts(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const WHALE_QUERY: &str =
    "Humpback found dead near Kodiak gets Alaska's first 2023 whale necropsy\n\
    A dead humpback whale was towed ashore near Kodiak; the necropsy found blunt trauma.";
const WHALE_CANDIDATE: &str = "Sitka team conducts first humpback whale necropsy in 5 years\n\
    Responders examined a dead humpback whale near Sitka.";

fn whale_tags() -> Vec<String> {
    texts(&["Marine Mammals", "Death / Die-off / Decline"])
}

#[test]
fn embeddings_are_batched_ordered_and_cached() {
    let stub = Stub::start(|req, _| (200, embeddings_reply(req, true)));
    let dir = tempfile::tempdir().unwrap();
    let mut config = stub.config();
    config.batch_size = 2;
    config.concurrency = 2;
    config.cache_dir = Some(dir.path().to_path_buf());
    let inputs = texts(&["a", "bb", "ccc", "dddd", "eeeee"]);

    let provider = Provider::from_config(&config).unwrap();
    let vectors = provider.embed_batch(&inputs).unwrap();
    for (t, v) in inputs.iter().zip(&vectors) {
        assert_eq!(v.values(), fake_vector(t).as_slice());
    }
    assert_eq!(stub.count("/v1/embeddings"), 3);
    let first = &stub.requests()[0];
    assert_eq!(first.auth.as_deref(), Some("Bearer sk-test"));
    assert_eq!(first.body["model"], "embed-small");

    let warm = Provider::from_config(&config).unwrap();
    assert_eq!(warm.embed_batch(&inputs).unwrap(), vectors);
    assert_eq!(stub.count("/v1/embeddings"), 3);
    assert_eq!(warm.stats().embedding_cache_hits, 5);
    assert!(warm.provider_id().starts_with("http-"));
}

#[test]
fn retries_transient_failures_only() {
    let stub = Stub::start(|req, nth| match nth {
        0 => (503, "{}".into()),
        1 => (429, "{}".into()),
        _ => (200, embeddings_reply(req, false)),
    });
    let provider = Provider::from_config(&stub.config()).unwrap();
    provider.embed("storm").unwrap();
    assert_eq!(stub.count("/v1/embeddings"), 3);

    let stub = Stub::start(|_, _| (400, r#"{"error":"bad"}"#.into()));
    let provider = Provider::from_config(&stub.config()).unwrap();
    match provider.embed("storm") {
        Err(ProviderError::Api { status: 400, body }) => assert!(body.contains("bad")),
        other => panic!("expected api error, got {other:?}"),
    }
    assert_eq!(stub.count("/v1/embeddings"), 1);

    let stub = Stub::start(|_, _| (500, "{}".into()));
    let mut config = stub.config();
    config.retries = 2;
    let provider = Provider::from_config(&config).unwrap();
    assert!(provider.embed("storm").is_err());
    assert_eq!(stub.count("/v1/embeddings"), 3);
}

#[test]
fn transport_failure_surfaces_after_retries() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    std::env::set_var(KEY_VAR, "sk-test");
    let mut config = ProviderConfig::http(&format!("http://127.0.0.1:{port}"), KEY_VAR, "e", "c");
    config.retries = 1;
    config.backoff_ms = 1;
    let err = Provider::from_config(&config)
        .unwrap()
        .embed("x")
        .unwrap_err();
    assert!(matches!(err, ProviderError::Transport(_)), "{err}");
    assert!(err.to_string().contains("after 2 attempts"));
}

#[test]
fn declared_dimension_is_enforced() {
    let stub = Stub::start(|req, _| (200, embeddings_reply(req, false)));
    let mut config = stub.config();
    config.dimension = Some(4);
    let err = Provider::from_config(&config)
        .unwrap()
        .embed("x")
        .unwrap_err();
    assert!(matches!(
        err,
        ProviderError::DimensionMismatch {
            expected: 4,
            got: 3
        }
    ));
}

#[test]
fn whale_entities_extracted_from_both_events() {
    let stub = Stub::start(|req, _| {
        let user = req.body["messages"][1]["content"].as_str().unwrap();
        let mut entities = vec![json!({"text": "humpback whale", "category": "Marine Mammals"})];
        if user.contains("blunt trauma") {
            entities.push(json!({"text": "blunt trauma", "category": "Death / Die-off / Decline"}));
        }
        (
            200,
            chat_reply(&json!({ "entities": entities }).to_string()),
        )
    });
    let provider = Provider::from_config(&stub.config()).unwrap();
    let query = provider
        .extract_entities(WHALE_QUERY, &whale_tags())
        .unwrap();
    let candidate = provider
        .extract_entities(WHALE_CANDIDATE, &whale_tags())
        .unwrap();
    for s in [&query, &candidate] {
        assert_eq!(
            s.entities_for("Marine Mammals").collect::<Vec<_>>(),
            ["humpback whale"]
        );
    }
    assert_eq!(
        query.rendered(),
        "Category: Marine Mammals; Entities: humpback whale. \
         Category: Death / Die-off / Decline; Entities: blunt trauma."
    );
    assert_eq!(
        candidate.entities_for("Death / Die-off / Decline").count(),
        0
    );

    let req = &stub.requests()[0];
    assert_eq!(req.path, "/v1/chat/completions");
    assert_eq!(req.body["model"], "chat-large");
    assert_eq!(req.body["response_format"]["type"], "json_object");
    let system = req.body["messages"][0]["content"].as_str().unwrap();
    assert!(system.contains("expert environmental-event annotator"));
    assert!(system.contains("step by step"));
}

#[test]
fn malformed_replies_retry_then_fall_back() {
    let stub = Stub::start(|_, nth| match nth {
        0 => (
            200,
            chat_reply("Sure! Here are the entities: humpback whale"),
        ),
        1 => (
            200,
            chat_reply(r#"{"entities":[{"text":"whale","category":"Birds"}]}"#),
        ),
        _ => (
            200,
            chat_reply(r#"{"entities":[{"text":"whale","category":"Marine Mammals"}]}"#),
        ),
    });
    let provider = Provider::from_config(&stub.config()).unwrap();
    let s = provider
        .extract_entities("Dead whale", &whale_tags())
        .unwrap();
    assert_eq!(
        s.entities_for("Marine Mammals").collect::<Vec<_>>(),
        ["whale"]
    );
    assert_eq!(stub.count("/v1/chat/completions"), 3);
    assert_eq!(provider.stats().ner_fallbacks, 0);

    let stub = Stub::start(|_, _| (200, chat_reply("no json here")));
    let dir = tempfile::tempdir().unwrap();
    let mut config = stub.config();
    config.retries = 2;
    config.cache_dir = Some(dir.path().to_path_buf());
    let provider = Provider::from_config(&config).unwrap();
    let s = provider
        .extract_entities("Dead whale", &whale_tags())
        .unwrap();
    assert_eq!(s, CategorySnippet::categories_only(whale_tags()));
    assert_eq!(stub.count("/v1/chat/completions"), 3);
    assert_eq!(provider.stats().ner_fallbacks, 1);

    // Fallbacks are not cached, so the next run asks again.
    let again = Provider::from_config(&config).unwrap();
    again.extract_entities("Dead whale", &whale_tags()).unwrap();
    assert_eq!(stub.count("/v1/chat/completions"), 6);
}

#[test]
fn rerank_endpoint_scores_pairs() {
    let stub = Stub::start(|req, _| {
        assert_eq!(req.path, "/v1/rerank");
        let q = req.body["query"].as_str().unwrap();
        let d = req.body["documents"][0].as_str().unwrap();
        let score = if q.contains("whale") && d.contains("whale") {
            0.9
        } else {
            0.1
        };
        (
            200,
            json!({"results": [{"index": 0, "relevance_score": score}]}).to_string(),
        )
    });
    let mut config = stub.config();
    config.rerank_model = Some("rerank-v1".into());
    let provider = Provider::from_config(&config).unwrap();
    assert_eq!(provider.cross_mode(), CrossMode::RerankEndpoint);
    assert_eq!(provider.manifest().cross_mode, CrossMode::RerankEndpoint);
    let whale = "Category: Marine Mammals; Entities: humpback whale.";
    assert_eq!(provider.cross_score(whale, "dead whale").unwrap(), 0.9);
    assert_eq!(provider.cross_score("smoke", whale).unwrap(), 0.1);
    assert_eq!(stub.requests()[0].body["model"], "rerank-v1");
}

#[test]
fn mock_cross_score_prefers_matching_whale_snippets() {
    let ent = |text: &str, category: &str| Entity {
        text: text.into(),
        category: category.into(),
    };
    let query = CategorySnippet::new(
        whale_tags(),
        vec![
            ent("humpback whale", "Marine Mammals"),
            ent("blunt trauma", "Death / Die-off / Decline"),
        ],
    );
    let candidate =
        CategorySnippet::new(whale_tags(), vec![ent("humpback whale", "Marine Mammals")]);
    let unrelated = CategorySnippet::new(
        texts(&["Wildfire", "Air Quality"]),
        vec![ent("smoke plume", "Air Quality")],
    );
    let p = Provider::mock();
    let related = p
        .cross_score(query.rendered(), candidate.rendered())
        .unwrap();
    let other = p
        .cross_score(query.rendered(), unrelated.rendered())
        .unwrap();
    assert!(related > other, "{related} vs {other}");
    assert_eq!(p.cross_mode(), CrossMode::CosineEmbedding);
}
