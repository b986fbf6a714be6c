use std::sync::{Arc, Barrier};
use std::thread::JoinHandle;

use convo_core::config::{BusyMode, EngineConfig, SeedMode};
use convo_core::dialog::Engine;
use serde_json::{json, Value};

struct Server {
    base: String,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl Server {
    fn start(cfg: EngineConfig) -> Server {
        let engine = Arc::new(Engine::builtin(cfg).unwrap());
        let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Runtime::new().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                convo_engine::http::serve(engine, listener, async {
                    let _ = stopped.await;
                })
                .await
                .unwrap();
            });
        });
        let addr = addr_rx.recv().unwrap();
        Server { base: format!("http://{addr}"), stop: Some(stop), thread: Some(thread) }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.stop.take().unwrap().send(());
        self.thread.take().unwrap().join().unwrap();
    }
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

fn send(method: &str, url: &str, body: Option<&str>) -> (u16, Value) {
    let a = agent();
    let mut resp = match (method, body) {
        ("GET", _) => a.get(url).call(),
        ("DELETE", _) => a.delete(url).call(),
        (_, Some(b)) => a.post(url).content_type("application/json").send(b),
        _ => a.post(url).send_empty(),
    }
    .unwrap();
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

fn post(url: &str, body: Value) -> (u16, Value) {
    send("POST", url, Some(&body.to_string()))
}

fn cfg(busy: BusyMode) -> EngineConfig {
    EngineConfig { seed: SeedMode::Fixed(1), busy, ..Default::default() }
}

fn new_session(base: &str) -> String {
    let (status, body) = post(&format!("{base}/sessions"), json!({"device_id": "web", "timezone": "UTC"}));
    assert_eq!(status, 201, "{body}");
    body["session_id"].as_str().unwrap().to_string()
}

#[test]
fn session_lifecycle() {
    let s = Server::start(cfg(BusyMode::Queue));
    assert_eq!(send("GET", &format!("{}/health", s.base), None), (200, json!({"status": "ok"})));

    let id = new_session(&s.base);
    let turns = format!("{}/sessions/{id}/turns", s.base);
    let (status, env) = post(&turns, json!({"text": "hello"}));
    assert_eq!(status, 200);
    assert_eq!(env["turn_index"], 0);
    assert!(env["text"].as_str().unwrap().contains("What's your name?"));
    assert!(env.get("debug").is_none_or(Value::is_null));

    let (_, env) = post(&turns, json!({"text": "i am ann", "debug": true}));
    let d = &env["debug"];
    for key in ["intent", "topic", "entities", "chosen_generator", "filter_verdicts", "latency_ms"] {
        assert!(d.get(key).is_some(), "missing {key} in {d}");
    }

    let (status, summary) = send("GET", &format!("{}/sessions/{id}", s.base), None);
    assert_eq!((status, summary["turns"].clone(), summary["name"].clone()), (200, json!(2), json!("Ann")));

    let (status, summary) = send("DELETE", &format!("{}/sessions/{id}", s.base), None);
    assert_eq!((status, summary["ended"].clone()), (200, json!(true)));
    assert_eq!(post(&turns, json!({"text": "hello"})).0, 410);
}

#[test]
fn goodbye_ends_the_session() {
    let s = Server::start(cfg(BusyMode::Queue));
    let id = new_session(&s.base);
    let turns = format!("{}/sessions/{id}/turns", s.base);
    let (_, env) = post(&turns, json!({"text": "goodbye"}));
    assert_eq!(env["ended"], true);
    assert_eq!(post(&turns, json!({"text": "wait"})).0, 410);
}

#[test]
fn bad_requests_are_rejected() {
    let s = Server::start(cfg(BusyMode::Queue));
    let sessions = format!("{}/sessions", s.base);
    assert_eq!(send("POST", &sessions, Some("{not json")).0, 400);
    assert_eq!(post(&sessions, json!({})).0, 400);
    assert_eq!(post(&sessions, json!({"device_id": ""})).0, 400);
    assert_eq!(post(&sessions, json!({"device_id": "x", "timezone": "Mars/Olympus"})).0, 400);
    assert_eq!(send("POST", &sessions, None).0, 400);

    let id = new_session(&s.base);
    let turns = format!("{}/sessions/{id}/turns", s.base);
    assert_eq!(post(&turns, json!({"text": "   "})).0, 400);
    assert_eq!(post(&turns, json!({"words": "hi"})).0, 400);
    let (status, body) = post(&format!("{}/sessions/nope/turns", s.base), json!({"text": "hi"}));
    assert_eq!(status, 404);
    assert!(body["error"].is_string());
    assert_eq!(send("GET", &format!("{}/sessions/nope", s.base), None).0, 404);
    assert_eq!(send("DELETE", &format!("{}/sessions/nope", s.base), None).0, 404);
}

fn race(base: &str, id: &str, n: usize) -> Vec<(u16, Value)> {
    let barrier = Arc::new(Barrier::new(n));
    let handles: Vec<_> = (0..n)
        .map(|i| {
            let (barrier, url) = (Arc::clone(&barrier), format!("{base}/sessions/{id}/turns"));
            std::thread::spawn(move || {
                barrier.wait();
                post(&url, json!({"text": format!("that is lovely number {i}")}))
            })
        })
        .collect();
    handles.into_iter().map(|h| h.join().unwrap()).collect()
}

#[test]
fn concurrent_posts_queue_or_conflict() {
    for mode in [BusyMode::Queue, BusyMode::Reject] {
        let s = Server::start(cfg(mode));
        let id = new_session(&s.base);
        let results = race(&s.base, &id, 8);
        let mut indices: Vec<u64> = results.iter().filter(|r| r.0 == 200).map(|r| r.1["turn_index"].as_u64().unwrap()).collect();
        indices.sort();
        assert_eq!(indices, (0..indices.len() as u64).collect::<Vec<_>>());
        assert!(results.iter().all(|r| r.0 == 200 || (mode == BusyMode::Reject && r.0 == 409)), "{results:?}");
        let (_, summary) = send("GET", &format!("{}/sessions/{id}", s.base), None);
        assert_eq!(summary["turns"].as_u64().unwrap(), indices.len() as u64);
    }
}
