//! Exhaustive ground truth: enumerate every chain, score them all, and
//! compare the stochastic search against the argmax.
//!
//! Run with: `cargo run --example oracle_check`

use thought_colony::colony::ColonyConfig;
use thought_colony::engine::{self, EngineConfig};
use thought_colony::providers::mock::HashEmbedder;
use thought_colony::providers::ExpertProvider;
use thought_colony::scoring::QualityWeights;
use thought_colony::synth::{self, SynthSpec};

fn main() {
    let embedder = HashEmbedder::default();
    let weights = QualityWeights::default();

    let mut recovered = 0;
    let trials = 20;
    for seed in 0..trials {
        let spec = SynthSpec {
            seed: 500 + seed,
            depth: 4,
            branching: 3,
            separation: 0.5,
            noise: 0.05,
            experts: 5,
        };
        let instance = synth::generate(&spec).unwrap();

        // The oracle scores every enumerable path with noise-free experts.
        let quiet = instance.quiet_experts();
        let quiet_refs: Vec<&dyn ExpertProvider> =
            quiet.iter().map(|e| e as &dyn ExpertProvider).collect();
        let paths = synth::enumerate_paths(&instance.graph).unwrap();
        let (oracle_path, oracle_q) =
            synth::oracle_best(&instance.graph, &weights, &embedder, &quiet_refs).unwrap();

        // The colony searches the same graph with noisy experts.
        let cfg = EngineConfig {
            colony: ColonyConfig {
                seed: spec.seed,
                ..ColonyConfig::default()
            },
            ..EngineConfig::default()
        };
        let out = engine::run(&instance.graph, &instance.expert_refs(), &embedder, &cfg).unwrap();
        let hit = out.result.best_path == oracle_path;
        recovered += hit as usize;

        if seed < 3 {
            println!(
                "seed {:>3}: {} paths enumerated, oracle Q* = {oracle_q:.4}, \
                 search {} in {} iterations",
                spec.seed,
                paths.len(),
                if hit { "matched" } else { "missed " },
                out.result.iterations_run
            );
        }
    }
    println!("\nsearch matched the exhaustive argmax in {recovered}/{trials} trials");
}
