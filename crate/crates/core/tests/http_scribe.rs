//! HTTP scribe against a throwaway local server.

mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use protoscribe_core::backbone::SyntheticCohortSpec;
use protoscribe_core::scribe::{
    optimize_report, Critic, DeferReason, HttpScribe, HttpScribeConfig, LoopConfig, OptimizationOutcome, TemplateScribe,
};
use serde_json::{json, Value};

/// Serves `replies` in order, one connection each, and returns the request bodies.
fn serve(replies: Vec<(u16, String)>) -> (String, thread::JoinHandle<Vec<Value>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let mut bodies = Vec::new();
        for (status, body) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; length];
            reader.read_exact(&mut buf).unwrap();
            bodies.push(serde_json::from_slice(&buf).unwrap());
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
        bodies
    });
    (url, handle)
}

fn completion(content: &str) -> String {
    json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string()
}

fn config(endpoint: String) -> HttpScribeConfig {
    HttpScribeConfig {
        endpoint,
        api_key: Some("k".into()),
        model: "test".into(),
        timeout_secs: 10,
    }
}

#[test]
fn accepted_report_and_transcript() {
    let w = common::world(
        &SyntheticCohortSpec {
            cases: 5,
            ..SyntheticCohortSpec::default()
        },
        0.5,
    );
    let state = &w.states[0];
    let taxonomy = &w.distiller.taxonomy;
    let faithful = serde_json::to_string(&TemplateScribe::new(taxonomy).render(state)).unwrap();
    let (url, server) = serve(vec![
        (200, completion("not json at all")),
        (200, completion(&format!("Here you go:\n```json\n{faithful}\n```"))),
    ]);
    let mut scribe = HttpScribe::new(config(url)).unwrap();
    let trace = optimize_report(
        state,
        &mut scribe,
        &Critic::new(taxonomy),
        LoopConfig {
            max_iterations: 2,
            retry_budget: 1,
        },
    );
    assert!(matches!(
        trace.outcome,
        OptimizationOutcome::Accepted { iterations_used: 1, .. }
    ));

    let bodies = server.join().unwrap();
    assert_eq!(bodies.len(), 2);
    assert_eq!(bodies[0]["model"], "test");
    let user = bodies[0]["messages"][1]["content"].as_str().unwrap();
    assert!(user.contains(&state.case.case_id));
    let transcripts = scribe.take_transcripts();
    assert_eq!(transcripts.len(), 2);
    assert!(transcripts[0].error.is_some());
    assert_eq!(transcripts[1].status, Some(200));
    assert!(transcripts.iter().all(|t| t.case_id == state.case.case_id));
}

#[test]
fn server_errors_exhaust_the_retry_budget() {
    let w = common::world(
        &SyntheticCohortSpec {
            cases: 2,
            ..SyntheticCohortSpec::default()
        },
        0.5,
    );
    let state = &w.states[0];
    let (url, server) = serve(vec![(500, "{}".into()), (503, "{}".into())]);
    let mut scribe = HttpScribe::new(config(url)).unwrap();
    let trace = optimize_report(
        state,
        &mut scribe,
        &Critic::new(&w.distiller.taxonomy),
        LoopConfig {
            max_iterations: 3,
            retry_budget: 1,
        },
    );
    match trace.outcome {
        OptimizationOutcome::Deferred {
            reason: DeferReason::BackendFailure { message },
            iterations_used,
            ..
        } => {
            assert!(message.contains("503"), "{message}");
            assert_eq!(iterations_used, 0);
        }
        other => panic!("expected a backend failure, got {other:?}"),
    }
    assert_eq!(server.join().unwrap().len(), 2);
}

#[test]
fn unreachable_endpoint_is_a_backend_failure() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let w = common::world(
        &SyntheticCohortSpec {
            cases: 1,
            ..SyntheticCohortSpec::default()
        },
        0.5,
    );
    let mut scribe = HttpScribe::new(config(format!("http://127.0.0.1:{port}/"))).unwrap();
    let trace = optimize_report(
        &w.states[0],
        &mut scribe,
        &Critic::new(&w.distiller.taxonomy),
        LoopConfig {
            max_iterations: 2,
            retry_budget: 0,
        },
    );
    assert!(matches!(
        trace.outcome,
        OptimizationOutcome::Deferred {
            reason: DeferReason::BackendFailure { .. },
            ..
        }
    ));
}
