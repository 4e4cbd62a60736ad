use std::sync::{Arc, OnceLock};
use std::time::Instant;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use pragrank::bundle::{enumerate_domain, Bundle, Domain, EnumerateConfig};
use pragrank::formats::parse_traces;
use pragrank::service::{router, AppState, ServiceConfig};
use pragrank_core::eval::{replay, simulate_traces, NoClock, RankListener};
use pragrank_core::ranking::{rank_listener, AnnealConfig};
use pragrank_core::GlobalRanking;
use serde_json::{json, Value};
use tower::ServiceExt;

fn small() -> &'static Bundle {
    static B: OnceLock<Bundle> = OnceLock::new();
    B.get_or_init(|| Bundle::build(Domain::RegexSmall, &EnumerateConfig::default(), 3, &AnnealConfig::default()).unwrap())
}

fn clone_bundle(b: &Bundle) -> Bundle {
    let mut out = Bundle::new(b.domain, b.lexicon.clone(), b.sigma.clone()).unwrap();
    out.stimuli = b.stimuli.clone();
    out
}

fn state(seed: u64) -> Arc<AppState> {
    Arc::new(AppState::new(vec![clone_bundle(small())], &ServiceConfig { seed, event_log: None }).unwrap())
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn create(app: &axum::Router, body: Value) -> Value {
    let (status, v) = call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v
}

/// A program both robots guess first from a single string, with that string.
fn agreed_first_guess(b: &Bundle) -> (usize, String) {
    let lex = &b.lexicon;
    let literal = GlobalRanking::from_scores(b.prior.weights().to_vec()).unwrap();
    (0..lex.m())
        .find_map(|u| {
            let a = rank_listener(&literal, lex, &[u], 1).ok()?[0].hypothesis;
            let s = rank_listener(&b.sigma, lex, &[u], 1).ok()?[0].hypothesis;
            (a == s).then(|| (a, lex.utterance_id(u).to_string()))
        })
        .expect("some string leads both robots to the same program")
}

#[tokio::test]
async fn lists_domains() {
    let app = router(state(0));
    let (status, v) = call(&app, "GET", "/domains", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["domains"][0]["name"], "regex-small");
    assert_eq!(v["domains"][0]["programs"], 372);
}

#[tokio::test]
async fn uniquely_identifying_example_solves_at_turn_one() {
    let app = router(state(0));
    let lex = &small().lexicon;
    let (target, example) = agreed_first_guess(small());
    let s = create(&app, json!({"domain": "regex-small", "target": lex.hypothesis_id(target)})).await;
    assert_eq!(s["robot_labels"], json!(["green", "blue"]));
    assert_eq!(s["target_rendered"], lex.hypothesis_id(target));
    let id = s["session_id"].as_str().unwrap();
    for robot in ["green", "blue"] {
        let (status, g) = call(&app, "POST", &format!("/sessions/{id}/examples"), Some(json!({"robot": robot, "utterance": example}))).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(g["solved"], true);
        assert_eq!(g["turn"], 1);
        assert_eq!(g["guess_id"], lex.hypothesis_id(target));
    }
    // solved robots accept nothing more
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/examples"), Some(json!({"robot": "green", "utterance": example}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"], "robot finished");
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/giveup"), Some(json!({"robot": "blue"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn bad_requests_are_refused_without_side_effects() {
    let app = router(state(0));
    let lex = &small().lexicon;
    let target = lex.hypothesis_index("0*").unwrap_or(0);
    let s = create(&app, json!({"domain": "regex-small", "target": lex.hypothesis_id(target)})).await;
    let id = s["session_id"].as_str().unwrap();
    let url = format!("/sessions/{id}/examples");
    let miss = (0..lex.m()).find(|&u| !lex.is_consistent(u, target)).unwrap();

    let (status, v) = call(&app, "POST", &url, Some(json!({"robot": "green", "utterance": lex.utterance_id(miss)}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "inconsistent example");
    let (status, v) = call(&app, "POST", &url, Some(json!({"robot": "green", "utterance": "01x"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "malformed utterance");
    let (status, _) = call(&app, "POST", &url, Some(json!({"robot": "purple", "utterance": ""}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&app, "POST", &url, Some(json!({"robot": "green"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, v) = call(&app, "POST", "/sessions", Some(json!({"domain": "animals"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "unknown domain");

    let (status, v) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["robots"][0]["turn"], 0);
    assert!(v["log"].as_array().unwrap().is_empty());
    // identities stay masked
    assert!(!v.to_string().contains("L0") && !v.to_string().contains("L_sigma"));

    for uri in ["/sessions/nope", "/sessions/nope/reveal"] {
        assert_eq!(call(&app, "GET", uri, None).await.0, StatusCode::NOT_FOUND);
    }
    let (status, _) = call(&app, "POST", "/sessions/nope/examples", Some(json!({"robot": "green", "utterance": "0"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn api_replay_matches_library_replay() {
    let app = router(state(7));
    let b = small();
    let lex = &b.lexicon;
    let literal = GlobalRanking::from_scores(b.prior.weights().to_vec()).unwrap();
    let targets: Vec<usize> = (0..lex.n()).step_by(9).collect();
    let traces = simulate_traces(lex, &b.prior, &targets, 5).unwrap();
    for trace in &traces {
        let s = create(&app, json!({"domain": "regex-small", "target": lex.hypothesis_id(trace.target)})).await;
        let id = s["session_id"].as_str().unwrap().to_string();
        let mut first_success = [None, None];
        for (i, robot) in ["green", "blue"].into_iter().enumerate() {
            for (turn, &u) in trace.utterances.iter().enumerate() {
                let (status, g) = call(&app, "POST", &format!("/sessions/{id}/examples"), Some(json!({"robot": robot, "utterance": lex.utterance_id(u)}))).await;
                assert_eq!(status, StatusCode::OK);
                // remember guesses to compare once identities are revealed
                if g["solved"] == true {
                    first_success[i] = Some(turn + 1);
                    break;
                }
            }
            let (status, _) = call(&app, "POST", &format!("/sessions/{id}/giveup"), Some(json!({"robot": robot}))).await;
            assert!(status == StatusCode::OK || status == StatusCode::CONFLICT);
        }
        let (status, reveal) = call(&app, "GET", &format!("/sessions/{id}/reveal"), None).await;
        assert_eq!(status, StatusCode::OK);
        let (_, view) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
        for (i, robot) in ["green", "blue"].into_iter().enumerate() {
            let ranking = match reveal["robots"][robot].as_str().unwrap() {
                "L0" => &literal,
                "L_sigma" => &b.sigma,
                other => panic!("{other}"),
            };
            let listener = RankListener::new("x", lex, ranking.clone()).unwrap();
            assert_eq!(replay(trace, &listener, 1, &NoClock).first_success, first_success[i]);
            // per-turn guesses equal the library listener's top-1
            let guesses: Vec<&str> = view["log"]
                .as_array()
                .unwrap()
                .iter()
                .filter(|e| e["robot"] == robot)
                .map(|e| e["guess_id"].as_str().unwrap())
                .collect();
            for (turn, guess) in guesses.iter().enumerate() {
                let top = rank_listener(ranking, lex, &trace.utterances[..=turn], 1).unwrap();
                assert_eq!(*guess, lex.hypothesis_id(top[0].hypothesis));
            }
        }
    }
}

#[tokio::test]
async fn assignment_is_seeded_and_balanced_and_stimuli_do_not_repeat() {
    let lex = &small().lexicon;
    let mut runs = Vec::new();
    for _ in 0..2 {
        let app = router(state(11));
        let mut green_literal = 0;
        let mut targets = Vec::new();
        for _ in 0..200 {
            let s = create(&app, json!({"domain": "regex-small", "client": "p1"})).await;
            let id = s["session_id"].as_str().unwrap();
            targets.push(s["target_id"].as_str().unwrap().to_string());
            for robot in ["green", "blue"] {
                call(&app, "POST", &format!("/sessions/{id}/giveup"), Some(json!({"robot": robot}))).await;
            }
            let (_, r) = call(&app, "GET", &format!("/sessions/{id}/reveal"), None).await;
            if r["robots"]["green"] == "L0" {
                green_literal += 1;
            }
        }
        let distinct: std::collections::BTreeSet<_> = targets.iter().collect();
        assert_eq!(distinct.len(), 200, "one client never sees a target twice before the pool is exhausted");
        assert!((60..=140).contains(&green_literal), "{green_literal}");
        runs.push((targets, green_literal));
    }
    assert_eq!(runs[0], runs[1]);
    assert!(lex.n() >= 200);
}

#[tokio::test]
async fn finished_robots_are_logged_as_traces() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("events.tsv");
    let st = Arc::new(
        AppState::new(vec![clone_bundle(small())], &ServiceConfig { seed: 3, event_log: Some(log.clone()) }).unwrap(),
    );
    let app = router(st);
    let lex = &small().lexicon;
    let (target, example) = agreed_first_guess(small());
    let s = create(&app, json!({"domain": "regex-small", "target": lex.hypothesis_id(target)})).await;
    let id = s["session_id"].as_str().unwrap();
    call(&app, "POST", &format!("/sessions/{id}/examples"), Some(json!({"robot": "green", "utterance": example}))).await;
    call(&app, "POST", &format!("/sessions/{id}/giveup"), Some(json!({"robot": "blue"}))).await;
    let text = std::fs::read_to_string(&log).unwrap();
    let got = parse_traces(&text, lex).unwrap();
    assert_eq!(got.traces.len(), 1, "the robot that gave up had no examples");
    assert_eq!(got.traces[0].target, target);
}

#[tokio::test]
async fn requests_are_fast_at_large_scale() {
    let e = enumerate_domain(Domain::RegexLarge, &EnumerateConfig::default()).unwrap();
    let n = e.lexicon.n();
    // latency does not depend on which ranking is loaded
    let sigma = GlobalRanking::from_order((0..n).rev().collect()).unwrap();
    let b = Bundle::new(Domain::RegexLarge, e.lexicon, sigma).unwrap();
    let lex = b.lexicon.clone();
    let app = router(Arc::new(AppState::new(vec![b], &ServiceConfig::default()).unwrap()));
    let mut worst = 0.0f64;
    for w in (0..n).step_by(97) {
        let t = Instant::now();
        let s = create(&app, json!({"domain": "regex-large", "target": lex.hypothesis_id(w)})).await;
        worst = worst.max(t.elapsed().as_secs_f64());
        let id = s["session_id"].as_str().unwrap();
        for u in lex.column(w).iter().take(3) {
            for robot in ["green", "blue"] {
                let t = Instant::now();
                let (status, _) = call(&app, "POST", &format!("/sessions/{id}/examples"), Some(json!({"robot": robot, "utterance": lex.utterance_id(*u as usize)}))).await;
                worst = worst.max(t.elapsed().as_secs_f64());
                assert!(status == StatusCode::OK || status == StatusCode::CONFLICT);
            }
        }
    }
    assert!(worst < 0.2, "slowest request took {worst:.3}s");
}
