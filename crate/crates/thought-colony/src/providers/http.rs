//! Providers backed by a chat-completion HTTP endpoint.
//!
//! The wire protocol is the ubiquitous JSON shape
//! `{model, messages: [{role, content}], temperature}` with the completion
//! text at `choices[0].message.content`. Endpoint, model, and auth are
//! configuration; the auth token is read from an environment variable and
//! never serialized or logged.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::graph::ReasoningState;

use super::{ExpertProvider, ExpertRole, ProviderError, ThoughtGenerator};

/// Retries after a failed request (3 attempts total).
const MAX_RETRIES: u32 = 2;
/// First backoff delay; doubles per retry.
const BACKOFF_START_MS: u64 = 500;

/// Connection settings for one chat-completion endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpProviderConfig {
    /// Full URL of the chat-completion endpoint.
    pub endpoint: String,
    /// Model identifier sent with every request.
    pub model: String,
    /// Name of the environment variable holding the bearer token, if any.
    #[serde(default)]
    pub auth_env_var: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Maximum concurrent requests through this client.
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_temperature() -> f64 {
    0.7
}

fn default_max_in_flight() -> usize {
    4
}

/// Counting semaphore bounding requests in flight.
struct Gate {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(slots: usize) -> Self {
        Gate {
            slots: Mutex::new(slots.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut slots = self.slots.lock().expect("gate lock poisoned");
        while *slots == 0 {
            slots = self.freed.wait(slots).expect("gate lock poisoned");
        }
        *slots -= 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.gate.slots.lock().expect("gate lock poisoned") += 1;
        self.gate.freed.notify_one();
    }
}

/// Blocking chat-completion client with bounded retries and concurrency.
pub struct ChatClient {
    cfg: HttpProviderConfig,
    client: reqwest::blocking::Client,
    auth: Option<String>,
    gate: Gate,
}

impl ChatClient {
    /// Builds the client, resolving the auth token from the configured
    /// environment variable.
    pub fn new(cfg: HttpProviderConfig) -> Result<Self, ProviderError> {
        let auth = match &cfg.auth_env_var {
            Some(var) => Some(std::env::var(var).map_err(|_| ProviderError::InvalidConfig {
                message: format!("auth environment variable {var} is not set"),
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| ProviderError::InvalidConfig {
                message: format!("could not build http client: {e}"),
            })?;
        let gate = Gate::new(cfg.max_in_flight);
        Ok(ChatClient {
            cfg,
            client,
            auth,
            gate,
        })
    }

    pub fn config(&self) -> &HttpProviderConfig {
        &self.cfg
    }

    /// Sends one system+user exchange and returns the completion text.
    /// Transient failures (network, timeout, 429, 5xx) are retried with
    /// exponential backoff; the final error carries the attempt count.
    pub fn complete(&self, system: &str, user: &str) -> Result<String, ProviderError> {
        let _slot = self.gate.acquire();
        let body = json!({
            "model": self.cfg.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": self.cfg.temperature,
        });

        let mut last_message = String::new();
        let mut last_status = None;
        for attempt in 1..=(MAX_RETRIES + 1) {
            if attempt > 1 {
                let delay = BACKOFF_START_MS << (attempt - 2);
                std::thread::sleep(Duration::from_millis(delay));
            }
            let mut request = self.client.post(&self.cfg.endpoint).json(&body);
            if let Some(token) = &self.auth {
                request = request.bearer_auth(token);
            }
            match request.send() {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        let value: serde_json::Value =
                            response.json().map_err(|e| ProviderError::Parse {
                                message: format!("response body is not JSON: {e}"),
                            })?;
                        return extract_completion(&value);
                    }
                    last_status = Some(status.as_u16());
                    last_message = format!("endpoint returned {status}");
                    let retryable = status.as_u16() == 429 || status.is_server_error();
                    if !retryable {
                        return Err(ProviderError::Http {
                            message: last_message,
                            status: last_status,
                            attempts: attempt,
                        });
                    }
                }
                Err(e) => {
                    last_message = e.to_string();
                    last_status = e.status().map(|s| s.as_u16());
                }
            }
        }
        Err(ProviderError::Http {
            message: last_message,
            status: last_status,
            attempts: MAX_RETRIES + 1,
        })
    }
}

fn extract_completion(value: &serde_json::Value) -> Result<String, ProviderError> {
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| ProviderError::Parse {
            message: "no completion text at choices[0].message.content".into(),
        })
}

/// The step-proposal prompt sent by [`HttpGenerator`]. `[problem here]` and
/// `[previous steps here]` are replaced per call.
pub const STEP_PROMPT_TEMPLATE: &str = r#"Imagine you are trying to solve a math problem with a step-by-step approach. At each step, you should propose a single next step to solve the problem involving a single arithmetic option. If there are multiple options for how to proceed, you should generate up to 3 options.

The format of the problem is as below, follow this format only

Input: XXXX

Steps taken so far: YYYY

Output: ZZZZ

NOTE: The options should not be sequential or connected with each other, each option should be in a way that it can be evaluated independently. Don't jump to the result directly.

IMPORTANT: **MAKE SURE NOT TO HAVE THE DIRECT ANSWER IN YOUR POSSIBLE STEPS OUTPUT, JUST MAKE ONE STEP AT A TIME.**

Solved Example:

Example 1

Input: "Jasper will serve charcuterie at his dinner party. He buys 2 pounds of cheddar cheese for $10, a pound of cream cheese that cost half the price of the cheddar cheese, and a pack of cold cuts that cost twice the price of the cheddar cheese. How much does he spend on the ingredients?"

Steps take so far: [Calculate the price of cheddar cheese which is $10 (given)]

Output: Possible independent steps:

1) Calculate the price of cold cuts which is 2*10 = $20.

2) Calculate the price of cream cheese which is 10/2 = $5 per pound.

Example 2

Input: "Weng earns $12 an hour for babysitting. Yesterday, she just did 50 minutes of babysitting. How much did she earn?"

Steps taken so far: [None]

Output: Possible next steps:

1) Convert the minutes of babysitting to hours.

2) Convert the wage per hour to wage per minute.

Example 3

Input: "James writes a 3-page letter to 2 different friends twice a week. How many pages does he write a year?"

Steps taken so far: [Number of letter written to 1 friend in a week = 2 as he writes twice a week]

Output: Possible next steps:

1) Number of letter written to 2 friends in a week = 2*2 = 4 letters a week.

2) Calculate the number of pages written to 1 friend in a week = 2*3 = 6 pages.

Now give the possible independent next steps for the below question, making one specifically numerical step at a time to solve the problem, without jumping to a proposed answer solution or repeating previous answer steps.

Input: "[problem here]"

Steps taken so far: [previous steps here]

Output:

1)"#;

/// Renders the step-proposal prompt for one expansion.
pub fn render_step_prompt(problem: &str, steps_so_far: &[String]) -> String {
    let steps = if steps_so_far.is_empty() {
        "None".to_string()
    } else {
        steps_so_far.join("; ")
    };
    STEP_PROMPT_TEMPLATE
        .replace("[problem here]", problem)
        .replace("[previous steps here]", &format!("[{steps}]"))
}

/// Splits a completion into numbered options (`1) ...`, `2) ...`).
/// Continuation lines are folded into the preceding option; at most `max`
/// options are kept, exact duplicates dropped.
pub fn parse_numbered_options(text: &str, max: usize) -> Result<Vec<String>, ProviderError> {
    let mut options: Vec<String> = Vec::new();
    let mut current: Option<String> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(rest) = split_numbered(trimmed) {
            if let Some(done) = current.take() {
                options.push(done);
            }
            current = Some(rest.to_string());
        } else if let Some(cur) = current.as_mut() {
            if !trimmed.is_empty() {
                cur.push(' ');
                cur.push_str(trimmed);
            }
        }
    }
    if let Some(done) = current.take() {
        options.push(done);
    }
    let mut seen = std::collections::HashSet::new();
    let options: Vec<String> = options
        .into_iter()
        .map(|o| o.trim().to_string())
        .filter(|o| !o.is_empty() && seen.insert(o.clone()))
        .take(max)
        .collect();
    if options.is_empty() {
        return Err(ProviderError::Parse {
            message: "completion contains no numbered options".into(),
        });
    }
    Ok(options)
}

/// Returns the text after `N)` when the line starts with a numbered marker.
fn split_numbered(line: &str) -> Option<&str> {
    let digits = line.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits == 0 {
        return None;
    }
    let rest = &line[digits..];
    rest.strip_prefix(')').map(str::trim_start)
}

/// Extracts the first number from a reply and maps it from 0-100 to [0, 1].
pub fn parse_rating(text: &str) -> Result<f64, ProviderError> {
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_ascii_digit() {
            start = Some(i);
            break;
        }
    }
    let start = start.ok_or_else(|| ProviderError::Parse {
        message: format!("no number in expert reply {:?}", truncate(text, 80)),
    })?;
    let tail = &text[start..];
    let end = tail
        .char_indices()
        .find(|(_, c)| !c.is_ascii_digit() && *c != '.')
        .map(|(i, _)| i)
        .unwrap_or(tail.len());
    let number: f64 = tail[..end].trim_end_matches('.').parse().map_err(|_| {
        ProviderError::Parse {
            message: format!("unparseable number in expert reply {:?}", truncate(text, 80)),
        }
    })?;
    Ok((number / 100.0).clamp(0.0, 1.0))
}

fn truncate(text: &str, max: usize) -> &str {
    match text.char_indices().nth(max) {
        Some((i, _)) => &text[..i],
        None => text,
    }
}

/// Thought generator that prompts the endpoint with the step-proposal
/// template and parses the numbered options from the completion.
pub struct HttpGenerator {
    client: ChatClient,
    system_prompt: String,
}

impl HttpGenerator {
    pub fn new(cfg: HttpProviderConfig) -> Result<Self, ProviderError> {
        Ok(HttpGenerator {
            client: ChatClient::new(cfg)?,
            system_prompt: "You decompose problems into small independent next steps.".into(),
        })
    }

    pub fn with_system_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.system_prompt = prompt.into();
        self
    }
}

impl ThoughtGenerator for HttpGenerator {
    fn generate(
        &self,
        problem: &str,
        steps_so_far: &[String],
        max_branches: usize,
    ) -> Result<Vec<String>, ProviderError> {
        let prompt = render_step_prompt(problem, steps_so_far);
        let completion = self.client.complete(&self.system_prompt, &prompt)?;
        // The template ends with "1)", so a reply may start mid-option.
        let completion = if completion.trim_start().starts_with(|c: char| c.is_ascii_digit()) {
            completion
        } else {
            format!("1) {completion}")
        };
        parse_numbered_options(&completion, max_branches)
    }

    fn final_answer(&self, problem: &str, chain: &[String]) -> Result<String, ProviderError> {
        let steps = chain
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{}. {s}", i + 1))
            .collect::<Vec<_>>()
            .join("\n");
        let prompt = format!(
            "Input: \"{problem}\"\n\nReasoning steps:\n{steps}\n\nUsing only these steps, \
             state the final answer concisely."
        );
        let reply = self.client.complete(&self.system_prompt, &prompt)?;
        Ok(reply.trim().to_string())
    }
}

/// Expert that rates candidate steps and complete chains by prompting the
/// endpoint for a 0-100 judgement. A non-numeric reply is retried once.
pub struct HttpExpert {
    client: ChatClient,
    role: ExpertRole,
    system_prompt: String,
}

impl HttpExpert {
    pub fn new(cfg: HttpProviderConfig, role: ExpertRole) -> Result<Self, ProviderError> {
        Ok(HttpExpert {
            client: ChatClient::new(cfg)?,
            role,
            system_prompt: format!(
                "You are a {role} reasoning expert. Judge reasoning strictly from your \
                 specialty's point of view and reply with a single integer between 0 and 100."
            ),
        })
    }

    pub fn with_system_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.system_prompt = prompt.into();
        self
    }

    fn rated(&self, prompt: &str) -> Result<f64, ProviderError> {
        let reply = self.client.complete(&self.system_prompt, prompt)?;
        match parse_rating(&reply) {
            Ok(v) => Ok(v),
            Err(_) => {
                let reply = self.client.complete(&self.system_prompt, prompt)?;
                parse_rating(&reply)
            }
        }
    }
}

impl ExpertProvider for HttpExpert {
    fn role(&self) -> ExpertRole {
        self.role
    }

    fn heuristic(&self, state: &ReasoningState, candidate: &str) -> Result<f64, ProviderError> {
        let steps = if state.chain.is_empty() {
            "None".to_string()
        } else {
            state.chain.join("; ")
        };
        let prompt = format!(
            "Input: \"{}\"\n\nSteps taken so far: [{steps}]\n\nCandidate next step: {candidate}\n\n\
             Rate from 0 to 100 how promising this candidate step is as the next step. \
             Reply with a single integer.",
            state.problem
        );
        self.rated(&prompt)
    }

    fn score_path(&self, problem: &str, chain: &[String]) -> Result<f64, ProviderError> {
        let steps = chain
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{}. {s}", i + 1))
            .collect::<Vec<_>>()
            .join("\n");
        let prompt = format!(
            "Input: \"{problem}\"\n\nComplete reasoning chain:\n{steps}\n\n\
             Rate the overall quality of this reasoning chain from 0 to 100. \
             Reply with a single integer."
        );
        self.rated(&prompt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_numbered_options() {
        let completion = "1) Convert the minutes of babysitting to hours.\n\
                          2) Convert the wage per hour to wage per minute.";
        let options = parse_numbered_options(completion, 3).unwrap();
        assert_eq!(
            options,
            vec![
                "Convert the minutes of babysitting to hours.".to_string(),
                "Convert the wage per hour to wage per minute.".to_string(),
            ]
        );
    }

    #[test]
    fn caps_and_dedups_options() {
        let completion = "1) a\n2) b\n3) b\n4) c\n5) d";
        let options = parse_numbered_options(completion, 3).unwrap();
        assert_eq!(options, vec!["a", "b", "c"]);
    }

    #[test]
    fn folds_continuation_lines() {
        let completion = "1) first half\ncontinues here\n2) second";
        let options = parse_numbered_options(completion, 5).unwrap();
        assert_eq!(options, vec!["first half continues here", "second"]);
    }

    #[test]
    fn empty_completion_is_a_parse_error() {
        assert!(matches!(
            parse_numbered_options("", 3),
            Err(ProviderError::Parse { .. })
        ));
        assert!(matches!(
            parse_numbered_options("no numbering at all", 3),
            Err(ProviderError::Parse { .. })
        ));
    }

    #[test]
    fn rating_parses_and_clamps() {
        assert_eq!(parse_rating("85").unwrap(), 0.85);
        assert_eq!(parse_rating("Score: 40 / 100").unwrap(), 0.4);
        assert_eq!(parse_rating("I'd say 72.5 overall").unwrap(), 0.725);
        assert_eq!(parse_rating("150").unwrap(), 1.0);
        assert!(parse_rating("no digits here").is_err());
    }

    #[test]
    fn step_prompt_renders_placeholders() {
        let prompt = render_step_prompt("What is 2+2?", &[]);
        assert!(prompt.contains("Input: \"What is 2+2?\""));
        assert!(prompt.ends_with("1)"));
        assert!(prompt.contains("Steps taken so far: [None]"));

        let steps = vec!["halve it".to_string(), "double it".to_string()];
        let prompt = render_step_prompt("p", &steps);
        assert!(prompt.contains("Steps taken so far: [halve it; double it]"));
    }
}
