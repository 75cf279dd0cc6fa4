//! The HTTP API, driven over a real socket against an in-process server.

use std::net::SocketAddr;
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use reqwest::{Client, StatusCode};
use serde_json::{json, Value};
use tsm_cli::serve::{router, AppState};
use tsm_core::model::{initial_state, instances, step};
use tsm_core::trace::args_to_json;
use tsm_core::{fixtures, Model, StepOutcome, Universe};

struct Server {
    base: String,
    state: Arc<AppState>,
    client: Client,
}

impl Server {
    async fn start(model: Model, universe: Universe) -> Self {
        Self::with_state(AppState::new(model, universe)).await
    }

    async fn with_state(state: Arc<AppState>) -> Self {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr: SocketAddr = listener.local_addr().unwrap();
        let app = router(state.clone(), None);
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        Server { base: format!("http://{addr}"), state, client: Client::new() }
    }

    async fn get(&self, path: &str) -> (StatusCode, Value) {
        let resp = self.client.get(format!("{}{path}", self.base)).send().await.unwrap();
        (resp.status(), resp.json().await.unwrap())
    }

    async fn post(&self, path: &str, body: Option<&str>) -> (StatusCode, Value) {
        let mut req = self.client.post(format!("{}{path}", self.base));
        if let Some(body) = body {
            req = req.header("content-type", "application/json").body(body.to_string());
        }
        let resp = req.send().await.unwrap();
        (resp.status(), resp.json().await.unwrap())
    }

    async fn new_session(&self) -> String {
        let (status, view) = self.post("/api/sessions", None).await;
        assert_eq!(status, StatusCode::CREATED);
        view["sessionId"].as_str().unwrap().to_string()
    }

    async fn fire(&self, id: &str, body: Value) -> (StatusCode, Value) {
        self.post(&format!("/api/sessions/{id}/fire"), Some(&body.to_string())).await
    }
}

#[tokio::test]
async fn model_summary_includes_initial_state() {
    let server = Server::start(fixtures::trafficlight(), Universe::default()).await;
    let (status, model) = server.get("/api/model").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(model["name"], "TrafficLight");
    assert_eq!(model["initial"], json!({"s": "Color.Black"}));
    assert_eq!(model["rules"].as_array().unwrap().len(), 5);
    assert_eq!(model["actions"][0], json!({"name": "timerflip", "params": []}));
}

#[tokio::test]
async fn session_lifecycle() {
    let server = Server::start(fixtures::trafficlight(), Universe::default()).await;
    let (_, view) = server.post("/api/sessions", None).await;
    let id = view["sessionId"].as_str().unwrap();
    assert_eq!(view["state"], json!({"s": "Color.Black"}));
    assert_eq!(view["enabled"], json!([{"action": "timerflip", "args": {}}]));
    assert_eq!(view["historyLength"], 0);

    let (status, fired) = server.fire(id, json!({"action": "timerflip"})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fired["outcome"], "fired");
    assert_eq!(fired["rule"], "r4");
    assert_eq!(fired["state"], json!({"s": "Color.Red"}));
    assert_eq!(fired["observable"], json!({"y": "Color.Red"}));

    let (_, view) = server.get(&format!("/api/sessions/{id}")).await;
    assert_eq!(view["canonical"], "{s: Color.Red}");
    assert_eq!(view["historyLength"], 1);

    let (status, view) = server.post(&format!("/api/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["state"], json!({"s": "Color.Black"}));
    let (status, body) = server.post(&format!("/api/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].is_string());

    server.fire(id, json!({"action": "timerflip"})).await;
    server.fire(id, json!({"action": "timerflip"})).await;
    let (status, view) = server.post(&format!("/api/sessions/{id}/reset"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["canonical"], "{s: Color.Black}");
    assert_eq!(view["historyLength"], 0);
}

#[tokio::test]
async fn undefined_fire_returns_a_question_and_keeps_the_state() {
    let server = Server::start(fixtures::trafficlight(), Universe::default()).await;
    let id = server.new_session().await;
    let (status, body) = server.fire(&id, json!({"action": "manualswitch", "args": {}})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["outcome"], "undefined");
    assert_eq!(body["question"], "What does the system do when manualswitch occurs in state {s: Color.Black}?");
    assert_eq!(body["state"], json!({"s": "Color.Black"}));
    let (_, view) = server.get(&format!("/api/sessions/{id}")).await;
    assert_eq!(view["historyLength"], 0);
}

#[tokio::test]
async fn parameterised_actions_take_named_args() {
    let server = Server::start(fixtures::mytodo(), Universe::with_ids(&["t1", "t2"]).max_list_len(2)).await;
    let id = server.new_session().await;
    let (_, body) = server.fire(&id, json!({"action": "Add", "args": {"t": "t1"}})).await;
    assert_eq!(body["rule"], "add");
    assert_eq!(body["observable"], json!({"l": "[{id: t1, status: Status.notdone}]", "t": "t1"}));
    let (_, view) = server.get(&format!("/api/sessions/{id}")).await;
    assert!(view["enabled"].as_array().unwrap().contains(&json!({"action": "MarkDone", "args": {"t": "t2"}})));
}

#[tokio::test]
async fn bad_requests_are_rejected() {
    let server = Server::start(fixtures::mytodo(), Universe::with_ids(&["t1"])).await;
    let id = server.new_session().await;
    for body in [
        "not json",
        r#"{"args": {}}"#,
        r#"{"action": "Fly"}"#,
        r#"{"action": "Add"}"#,
        r#"{"action": "Add", "args": {"t": 3}}"#,
        r#"{"action": "Add", "args": {"t": "t1", "u": "t2"}}"#,
    ] {
        let (status, reply) = server.post(&format!("/api/sessions/{id}/fire"), Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert!(reply["error"].is_string(), "{body}");
    }
    let (_, view) = server.get(&format!("/api/sessions/{id}")).await;
    assert_eq!(view["historyLength"], 0);
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let server = Server::start(fixtures::trafficlight(), Universe::default()).await;
    let (status, body) = server.get("/api/sessions/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].as_str().unwrap().contains("nope"));
    for path in ["fire", "undo", "reset"] {
        let (status, _) = server.post(&format!("/api/sessions/nope/{path}"), Some(r#"{"action": "timerflip"}"#)).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{path}");
    }
}

#[tokio::test]
async fn concurrent_mutation_is_rejected_as_busy() {
    let server = Server::start(fixtures::trafficlight(), Universe::default()).await;
    let id = server.new_session().await;
    let guard = server.state.hold_session(&id).await.unwrap();
    let (status, body) = server.fire(&id, json!({"action": "timerflip"})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(body["error"].is_string());
    let (status, _) = server.post(&format!("/api/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = server.post(&format!("/api/sessions/{id}/reset"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    drop(guard);
    let (status, body) = server.fire(&id, json!({"action": "timerflip"})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["rule"], "r4");
}

#[tokio::test]
async fn idle_sessions_expire() {
    let state = AppState::with_idle_limit(fixtures::trafficlight(), Universe::default(), Duration::from_millis(200));
    let server = Server::with_state(state).await;
    let stale = server.new_session().await;
    let fresh = server.new_session().await;
    tokio::time::sleep(Duration::from_millis(120)).await;
    assert_eq!(server.get(&format!("/api/sessions/{fresh}")).await.0, StatusCode::OK);
    tokio::time::sleep(Duration::from_millis(120)).await;
    assert_eq!(server.get(&format!("/api/sessions/{stale}")).await.0, StatusCode::NOT_FOUND);
    assert_eq!(server.get(&format!("/api/sessions/{fresh}")).await.0, StatusCode::OK);
    tokio::time::sleep(Duration::from_millis(250)).await;
    server.state.sweep();
    assert_eq!(server.state.session_count(), 0);
}

#[tokio::test]
async fn graph_endpoint_returns_the_explored_graph() {
    let server = Server::start(fixtures::trafficlight(), Universe::default()).await;
    let (status, graph) = server.get("/api/graph").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(graph["states"].as_array().unwrap().len(), 4);
    assert_eq!(graph["transitions"].as_array().unwrap().len(), 7);
    assert_eq!(graph["undefined"], json!([{"action": "manualswitch", "state": 0}]));
    assert_eq!(graph["truncated"], false);

    let (_, small) = server.get("/api/graph?maxStates=1").await;
    assert_eq!(small["states"].as_array().unwrap().len(), 1);
    assert_eq!(small["truncated"], true);

    for query in ["maxStates=0", "maxStates=100001", "maxStates=lots", "maxList=-1"] {
        let (status, body) = server.get(&format!("/api/graph?{query}")).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{query}");
        assert!(body["error"].is_string());
    }
}

#[tokio::test]
async fn graph_and_questions_take_universe_parameters() {
    let server = Server::start(fixtures::mytodo(), Universe::default()).await;
    for query in ["ids=", "maxList=0"] {
        let (status, _) = server.get(&format!("/api/graph?{query}")).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{query}");
    }
    let (status, graph) = server.get("/api/graph?ids=t1&maxList=1").await;
    assert_eq!(status, StatusCode::OK);
    let initial: Vec<&Value> = graph["states"].as_array().unwrap().iter().filter(|s| s["initial"] == true).collect();
    assert_eq!(initial.len(), 1);
    assert_eq!(initial[0]["canonical"], "{s: Phase.N, l: [], last: none}");

    let (status, report) = server.get("/api/questions?ids=t1,t2&maxList=2").await;
    assert_eq!(status, StatusCode::OK);
    let kinds: Vec<&str> = report["questions"].as_array().unwrap().iter().map(|q| q["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"overlappingRules"));
    assert!(kinds.contains(&"unreachableEnumMember"));
}

#[tokio::test]
async fn questions_endpoint_lists_the_gap() {
    let server = Server::start(fixtures::trafficlight(), Universe::default()).await;
    let (status, report) = server.get("/api/questions").await;
    assert_eq!(status, StatusCode::OK);
    let questions = report["questions"].as_array().unwrap();
    assert_eq!(questions.len(), 1);
    assert_eq!(questions[0]["kind"], "undefinedTransition");
}

/// Random walks through the API land in exactly the states the library
/// computes for the same actions.
#[tokio::test]
async fn api_agrees_with_library_stepping() {
    let model = fixtures::mytodo();
    let universe = Universe::with_ids(&["t1", "t2"]).max_list_len(3);
    let server = Server::start(model.clone(), universe.clone()).await;
    let pool: Vec<_> = model.actions.iter().flat_map(|sig| instances(&model, sig, &universe)).collect();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20 {
        let id = server.new_session().await;
        let mut state = initial_state(&model).unwrap();
        for _ in 0..15 {
            let action = &pool[rng.gen_range(0..pool.len())];
            let body = json!({"action": action.name, "args": args_to_json(&model, action)});
            let (status, reply) = server.fire(&id, body).await;
            assert_eq!(status, StatusCode::OK);
            match step(&model, &state, action) {
                Ok(StepOutcome::Fired { rule, next, .. }) => {
                    assert_eq!(reply["outcome"], "fired");
                    assert_eq!(reply["rule"], rule.as_str());
                    state = next;
                }
                Ok(StepOutcome::Undefined) => assert_eq!(reply["outcome"], "undefined"),
                Err(_) => assert_eq!(reply["outcome"], "error"),
            }
            assert_eq!(reply["canonical"], state.canonical());
        }
    }
}

#[test]
fn busy_port_exits_with_error() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let output = Command::new(env!("CARGO_BIN_EXE_tsm"))
        .args(["serve", "crates/core/fixtures/trafficlight.tsm", "--port", &port])
        .current_dir(root)
        .stdin(Stdio::null())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("cannot listen"));
}

#[tokio::test]
async fn static_ui_is_served_beside_the_api() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>explorer</h1>").unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(AppState::new(fixtures::trafficlight(), Universe::default()), Some(dir.path().to_path_buf()));
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    let page = reqwest::get(format!("http://{addr}/index.html")).await.unwrap();
    assert_eq!(page.status(), StatusCode::OK);
    assert_eq!(page.text().await.unwrap(), "<h1>explorer</h1>");
    let api = reqwest::get(format!("http://{addr}/api/model")).await.unwrap();
    assert_eq!(api.status(), StatusCode::OK);
    let missing = reqwest::get(format!("http://{addr}/nope.js")).await.unwrap();
    assert_eq!(missing.status(), StatusCode::NOT_FOUND);
}
