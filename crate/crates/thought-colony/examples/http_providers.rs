//! Wiring the search to a real chat-completion endpoint.
//!
//! Without credentials this example prints the request shape and the
//! rendered prompts. Set COLONY_ENDPOINT (and optionally COLONY_MODEL plus
//! COLONY_API_KEY) to exercise a live endpoint:
//!
//! ```bash
//! COLONY_ENDPOINT=http://localhost:8080/v1/chat/completions \
//!     cargo run --example http_providers
//! ```

use thought_colony::providers::http::{
    render_step_prompt, HttpExpert, HttpGenerator, HttpProviderConfig,
};
use thought_colony::providers::{ExpertProvider, ExpertRole, ThoughtGenerator};
use thought_colony::ReasoningState;

fn main() {
    let problem = "Weng earns $12 an hour for babysitting. Yesterday, she \
                   just did 50 minutes of babysitting. How much did she earn?";
    let steps = vec!["Convert the minutes of babysitting to hours.".to_string()];

    println!("=== step-proposal prompt (rendered) ===\n");
    let prompt = render_step_prompt(problem, &steps);
    // The prompt is long; show the tail where the placeholders land.
    let tail: String = prompt
        .lines()
        .rev()
        .take(8)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect::<Vec<_>>()
        .join("\n");
    println!("...\n{tail}\n");

    let Ok(endpoint) = std::env::var("COLONY_ENDPOINT") else {
        println!("=== request shape ===\n");
        println!(
            "POST <endpoint>\n{}",
            serde_json::to_string_pretty(&serde_json::json!({
                "model": "<model>",
                "messages": [
                    {"role": "system", "content": "<role prompt>"},
                    {"role": "user", "content": "<rendered prompt>"},
                ],
                "temperature": 0.7,
            }))
            .unwrap()
        );
        println!(
            "\nThe completion text is read from choices[0].message.content; numbered\n\
             options (\"1) ...\") become candidate thoughts. Transient failures are\n\
             retried twice with exponential backoff, and at most max_in_flight\n\
             requests run concurrently.\n\n\
             Set COLONY_ENDPOINT to run this against a live endpoint."
        );
        return;
    };

    let config = HttpProviderConfig {
        endpoint,
        model: std::env::var("COLONY_MODEL").unwrap_or_else(|_| "gpt-4o-mini".into()),
        auth_env_var: std::env::var("COLONY_API_KEY")
            .is_ok()
            .then(|| "COLONY_API_KEY".to_string()),
        timeout_ms: 30_000,
        temperature: 0.7,
        max_in_flight: 4,
    };

    println!("=== live call: proposing next steps ===\n");
    let generator = HttpGenerator::new(config.clone()).expect("generator config");
    match generator.generate(problem, &steps, 3) {
        Ok(thoughts) => {
            for (i, t) in thoughts.iter().enumerate() {
                println!("{}) {t}", i + 1);
            }
        }
        Err(e) => println!("generation failed: {e}"),
    }

    println!("\n=== live call: expert heuristic ===\n");
    let expert = HttpExpert::new(config, ExpertRole::Mathematical).expect("expert config");
    let state = ReasoningState {
        problem: problem.to_string(),
        chain: steps,
    };
    match expert.heuristic(&state, "Convert the wage per hour to wage per minute.") {
        Ok(score) => println!("mathematical expert rates the candidate {score:.2}"),
        Err(e) => println!("heuristic failed: {e}"),
    }
}
