//! Colony search over trees of reasoning steps.
//!
//! A central generator expands a problem into a layered tree of candidate
//! intermediate thoughts. A colony of expert-guided ants then walks the tree
//! repeatedly: each ant picks its next step from pheromone levels and its
//! expert's own judgement, complete chains are scored for coherence, length,
//! and expert consensus, and good chains reinforce their edges while
//! everything else evaporates. After a few iterations the pheromone trail
//! concentrates on one chain of thought, which is extracted as the answer
//! path.
//!
//! The LLM-facing pieces (thought generation, expert scoring, embeddings)
//! sit behind the traits in [`providers`], so the whole loop runs unchanged
//! against deterministic mocks, the planted-optimum benchmarks in [`synth`],
//! or real chat-completion endpoints.
//!
//! # Module map
//!
//! - [`graph`] — layered thought graphs with `s0`/`sf` sentinels
//! - [`colony`] — pheromone matrix, transition rule, ant walks
//! - [`scoring`] — path quality `w1*C + w2*L + w3*M`
//! - [`providers`] — generator/expert/embedder traits, mock and HTTP impls
//! - [`engine`] — the iterate/construct/score/update loop
//! - [`synth`] — planted benchmark instances and the exhaustive oracle
//! - [`config`], [`cli`] — run configuration and the `run`/`bench`/`inspect`
//!   commands
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example generate_tree      # tree-of-thought generation
//! cargo run --example transition_rules   # the ant transition rule
//! cargo run --example pheromone_dynamics # evaporation and deposits
//! cargo run --example score_paths        # quality decomposition
//! cargo run --example planted_recovery   # full search on a planted instance
//! cargo run --example oracle_check       # exhaustive oracle comparison
//! cargo run --example ablation_grid      # alpha/beta sweep
//! cargo run --example http_providers     # chat-endpoint configuration
//! ```

pub mod cli;
pub mod colony;
pub mod config;
pub mod engine;
pub mod graph;
pub mod providers;
pub mod scoring;
pub mod synth;

pub use colony::{ColonyConfig, PheromoneMatrix};
pub use engine::{EngineConfig, IterationMetrics, RunOutput, RunResult};
pub use graph::{NodeId, Path, ReasoningGraph, ReasoningState, Thought, ThoughtTree, ToTGenConfig};
pub use providers::{CallCounts, Embedder, ExpertProvider, ExpertRole, ThoughtGenerator};
pub use scoring::{PathQuality, QualityWeights};
pub use synth::{SynthInstance, SynthSpec};
