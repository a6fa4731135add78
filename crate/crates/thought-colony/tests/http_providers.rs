//! HTTP provider tests against a scripted local chat-completion server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread::JoinHandle;
use std::time::Duration;

use thought_colony::providers::http::{HttpExpert, HttpGenerator, HttpProviderConfig};
use thought_colony::providers::{ExpertProvider, ExpertRole, ProviderError, ThoughtGenerator};
use thought_colony::ReasoningState;

/// One scripted reply per incoming request.
enum Script {
    /// 200 with a chat completion containing this text.
    Completion(&'static str),
    /// Bare status code, empty body.
    Status(u16),
    /// Accept, then stall long enough to trip the client timeout.
    Stall(Duration),
}

struct TestServer {
    endpoint: String,
    handle: Option<JoinHandle<()>>,
    requests: mpsc::Receiver<String>,
}

impl TestServer {
    /// Serves the scripted replies in order, one connection each, then stops.
    fn start(script: Vec<Script>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind test server");
        let endpoint = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let (tx, rx) = mpsc::channel();
        let handle = std::thread::spawn(move || {
            for reply in script {
                let Ok((mut stream, _)) = listener.accept() else {
                    return;
                };
                let mut reader = BufReader::new(stream.try_clone().expect("clone stream"));
                let mut head = String::new();
                let mut content_length = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).is_err() || line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        content_length = v.trim().parse().unwrap_or(0);
                    }
                    head.push_str(&line);
                }
                let mut body = vec![0u8; content_length];
                reader.read_exact(&mut body).ok();
                let _ = tx.send(format!("{head}\n{}", String::from_utf8_lossy(&body)));

                match reply {
                    Script::Completion(text) => {
                        let body = serde_json::json!({
                            "choices": [{"message": {"role": "assistant", "content": text}}]
                        })
                        .to_string();
                        let _ = write!(
                            stream,
                            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\n\
                             Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                            body.len()
                        );
                    }
                    Script::Status(code) => {
                        let _ = write!(
                            stream,
                            "HTTP/1.1 {code} ERR\r\nContent-Length: 0\r\n\
                             Connection: close\r\n\r\n"
                        );
                    }
                    Script::Stall(period) => {
                        std::thread::sleep(period);
                    }
                }
            }
        });
        TestServer {
            endpoint,
            handle: Some(handle),
            requests: rx,
        }
    }

    fn config(&self) -> HttpProviderConfig {
        HttpProviderConfig {
            endpoint: self.endpoint.clone(),
            model: "test-model".into(),
            auth_env_var: None,
            timeout_ms: 2_000,
            temperature: 0.2,
            max_in_flight: 4,
        }
    }

    fn request_count(&mut self) -> usize {
        self.join();
        self.requests.try_iter().count()
    }

    fn join(&mut self) {
        if let Some(handle) = self.handle.take() {
            handle.join().expect("server thread");
        }
    }
}

#[test]
fn generator_renders_prompt_and_parses_options() {
    let mut server = TestServer::start(vec![Script::Completion(
        "1) Convert the minutes of babysitting to hours.\n\
         2) Convert the wage per hour to wage per minute.",
    )]);
    let generator = HttpGenerator::new(server.config()).unwrap();
    let steps = vec!["compute the rate".to_string()];
    let thoughts = generator.generate("How much did she earn?", &steps, 3).unwrap();
    assert_eq!(
        thoughts,
        vec![
            "Convert the minutes of babysitting to hours.".to_string(),
            "Convert the wage per hour to wage per minute.".to_string(),
        ]
    );

    server.join();
    let request = server.requests.try_iter().next().expect("request captured");
    // Chat-completion wire shape with the filled template.
    let body: serde_json::Value =
        serde_json::from_str(request.split('\n').next_back().unwrap()).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["temperature"], 0.2);
    assert_eq!(body["messages"][0]["role"], "system");
    let user = body["messages"][1]["content"].as_str().unwrap();
    assert!(user.contains("Input: \"How much did she earn?\""));
    assert!(user.contains("Steps taken so far: [compute the rate]"));
    assert!(user.ends_with("1)"));
}

#[test]
fn generator_retries_transient_failures() {
    let mut server = TestServer::start(vec![
        Script::Status(503),
        Script::Completion("1) recovered step"),
    ]);
    let generator = HttpGenerator::new(server.config()).unwrap();
    let thoughts = generator.generate("p", &[], 3).unwrap();
    assert_eq!(thoughts, vec!["recovered step".to_string()]);
    assert_eq!(server.request_count(), 2);
}

#[test]
fn generator_gives_up_after_retry_budget() {
    let mut server = TestServer::start(vec![
        Script::Status(500),
        Script::Status(500),
        Script::Status(500),
    ]);
    let generator = HttpGenerator::new(server.config()).unwrap();
    match generator.generate("p", &[], 3) {
        Err(ProviderError::Http { attempts, status, .. }) => {
            assert_eq!(attempts, 3);
            assert_eq!(status, Some(500));
        }
        other => panic!("expected http error, got {other:?}"),
    }
    assert_eq!(server.request_count(), 3);
}

#[test]
fn client_errors_do_not_retry() {
    let mut server = TestServer::start(vec![Script::Status(400)]);
    let generator = HttpGenerator::new(server.config()).unwrap();
    match generator.generate("p", &[], 3) {
        Err(ProviderError::Http { attempts, status, .. }) => {
            assert_eq!(attempts, 1);
            assert_eq!(status, Some(400));
        }
        other => panic!("expected http error, got {other:?}"),
    }
    assert_eq!(server.request_count(), 1);
}

#[test]
fn timeouts_are_bounded() {
    let mut server = TestServer::start(vec![
        Script::Stall(Duration::from_millis(1_200)),
        Script::Stall(Duration::from_millis(1_200)),
        Script::Stall(Duration::from_millis(1_200)),
    ]);
    let mut config = server.config();
    config.timeout_ms = 150;
    let generator = HttpGenerator::new(config).unwrap();
    let started = std::time::Instant::now();
    let result = generator.generate("p", &[], 3);
    // Three attempts of <=150ms plus 500ms and 1000ms of backoff.
    assert!(started.elapsed() < Duration::from_secs(4));
    assert!(matches!(result, Err(ProviderError::Http { .. })));
    server.join();
}

#[test]
fn empty_completion_is_a_parse_error() {
    let server = TestServer::start(vec![Script::Completion("nothing numbered here")]);
    let generator = HttpGenerator::new(server.config()).unwrap();
    // The reply is folded into the template's trailing "1)", so a completely
    // unnumbered reply still parses as one option; a blank one must not.
    let thoughts = generator.generate("p", &[], 3).unwrap();
    assert_eq!(thoughts, vec!["nothing numbered here".to_string()]);

    let server = TestServer::start(vec![Script::Completion("   \n  ")]);
    let generator = HttpGenerator::new(server.config()).unwrap();
    assert!(matches!(
        generator.generate("p", &[], 3),
        Err(ProviderError::Parse { .. })
    ));
}

#[test]
fn expert_parses_ratings_with_one_retry() {
    let mut server = TestServer::start(vec![
        Script::Completion("I cannot quantify that."),
        Script::Completion("Score: 85"),
    ]);
    let expert = HttpExpert::new(server.config(), ExpertRole::Mathematical).unwrap();
    let score = expert.score_path("p", &["step one".to_string()]).unwrap();
    assert_eq!(score, 0.85);
    assert_eq!(server.request_count(), 2);
}

#[test]
fn expert_fails_after_two_unparseable_replies() {
    let mut server = TestServer::start(vec![
        Script::Completion("no number"),
        Script::Completion("still none"),
    ]);
    let expert = HttpExpert::new(server.config(), ExpertRole::Scientific).unwrap();
    assert!(matches!(
        expert.score_path("p", &["s".to_string()]),
        Err(ProviderError::Parse { .. })
    ));
    assert_eq!(server.request_count(), 2);
}

#[test]
fn expert_heuristic_prompts_with_state() {
    let mut server = TestServer::start(vec![Script::Completion("72")]);
    let expert = HttpExpert::new(server.config(), ExpertRole::Logical).unwrap();
    let state = ReasoningState {
        problem: "the problem".into(),
        chain: vec!["first".into(), "second".into()],
    };
    let h = expert.heuristic(&state, "a candidate step").unwrap();
    assert_eq!(h, 0.72);

    server.join();
    let request = server.requests.try_iter().next().unwrap();
    let body: serde_json::Value =
        serde_json::from_str(request.split('\n').next_back().unwrap()).unwrap();
    let system = body["messages"][0]["content"].as_str().unwrap();
    assert!(system.contains("logical"));
    let user = body["messages"][1]["content"].as_str().unwrap();
    assert!(user.contains("the problem"));
    assert!(user.contains("[first; second]"));
    assert!(user.contains("a candidate step"));
}

#[test]
fn bearer_token_is_sent_from_env() {
    let mut server = TestServer::start(vec![Script::Completion("1) ok")]);
    let mut config = server.config();
    config.auth_env_var = Some("TC_HTTP_TEST_TOKEN".into());
    // Missing variable is a configuration error.
    std::env::remove_var("TC_HTTP_TEST_TOKEN");
    assert!(matches!(
        HttpGenerator::new(config.clone()),
        Err(ProviderError::InvalidConfig { .. })
    ));

    std::env::set_var("TC_HTTP_TEST_TOKEN", "sk-test-abc123");
    let generator = HttpGenerator::new(config).unwrap();
    generator.generate("p", &[], 1).unwrap();
    std::env::remove_var("TC_HTTP_TEST_TOKEN");

    server.join();
    let request = server.requests.try_iter().next().unwrap();
    assert!(
        request
            .lines()
            .any(|l| l.eq_ignore_ascii_case("authorization: Bearer sk-test-abc123")),
        "missing auth header in: {request}"
    );
}

#[test]
fn final_answer_round_trip() {
    let server = TestServer::start(vec![Script::Completion("  The answer is 42.  ")]);
    let generator = HttpGenerator::new(server.config()).unwrap();
    let answer = generator
        .final_answer("p", &["step".to_string()])
        .unwrap();
    assert_eq!(answer, "The answer is 42.");
}
