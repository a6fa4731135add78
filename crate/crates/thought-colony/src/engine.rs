//! The main optimization loop: construct paths with every ant, score them,
//! evaporate and deposit pheromone, extract the current best path, and stop
//! on stability.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colony::{construct_path, ColonyConfig, ColonyError, PheromoneMatrix};
use crate::graph::{NodeId, Path, ReasoningGraph};
use crate::providers::{
    CallCounts, CallLedger, CountingEmbedder, CountingExpert, Embedder, ExpertProvider,
};
use crate::scoring::{quality, QualityWeights, ScoringError};

/// Engine tunables on top of the colony configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub colony: ColonyConfig,
    pub weights: QualityWeights,
    /// Iteration budget `T`.
    pub max_iterations: usize,
    /// Consecutive identical best paths required to stop early.
    pub convergence_window: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            colony: ColonyConfig::default(),
            weights: QualityWeights::default(),
            max_iterations: 10,
            convergence_window: 3,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_iterations == 0 {
            return Err(EngineError::InvalidConfig {
                reason: "max_iterations must be at least 1".into(),
            });
        }
        if self.convergence_window == 0 {
            return Err(EngineError::InvalidConfig {
                reason: "convergence_window must be at least 1".into(),
            });
        }
        self.colony
            .validate()
            .map_err(|e| EngineError::InvalidConfig {
                reason: e.to_string(),
            })?;
        self.weights
            .validate()
            .map_err(|e| EngineError::InvalidConfig {
                reason: e.to_string(),
            })?;
        Ok(())
    }
}


/// Everything recorded about one iteration. Serialized flat, one JSON object
/// per line in the metrics stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    /// 1-based iteration index.
    pub iteration: usize,
    /// One constructed path per ant.
    pub paths: Vec<Path>,
    /// Quality of each ant's path.
    pub qualities: Vec<f64>,
    /// Highest quality among this iteration's ants.
    pub best_quality: f64,
    /// Mean thought count over the ants' paths.
    pub mean_path_length: f64,
    /// Fraction of ants on the modal path.
    pub agreement_rate: f64,
    /// Distinct paths divided by the ant count.
    pub path_diversity: f64,
    /// Mean pheromone on the extracted best path over mean pheromone on all
    /// other edges (1.0 when no other edges exist).
    pub concentration_ratio: f64,
    /// Best path extracted greedily from the pheromone matrix.
    pub best_path: Path,
    /// Provider calls made by the run so far.
    pub cumulative_calls: u64,
}

/// Final outcome of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_path: Path,
    /// Thought texts along the best path.
    pub best_chain: Vec<String>,
    pub iterations_run: usize,
    pub converged: bool,
    pub history: Vec<IterationMetrics>,
}

/// Run outcome plus the final pheromone state and the call ledger.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub result: RunResult,
    pub pheromones: PheromoneMatrix,
    pub calls: CallCounts,
}

/// What aborted a run.
#[derive(Debug, thiserror::Error)]
pub enum AbortCause {
    #[error(transparent)]
    Colony(#[from] ColonyError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Errors raised by the engine.
#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid engine configuration: {reason}")]
    InvalidConfig { reason: String },
    /// A provider failed mid-run; the history covers the completed
    /// iterations.
    #[error("run aborted during iteration {iteration}: {source}")]
    Aborted {
        iteration: usize,
        #[source]
        source: AbortCause,
        history: Vec<IterationMetrics>,
    },
}

/// Runs the full loop on an augmented graph with one expert per ant.
///
/// Each iteration: every ant constructs a complete path against a frozen
/// pheromone snapshot (ants run in parallel, each on its own seeded RNG
/// stream), paths are scored once per distinct path, evaporation runs before
/// deposits, and the greedy best path is extracted. The run stops early once
/// the extracted path has been identical for `convergence_window` consecutive
/// iterations.
pub fn run(
    g: &ReasoningGraph,
    experts: &[&dyn ExpertProvider],
    embedder: &dyn Embedder,
    cfg: &EngineConfig,
) -> Result<RunOutput, EngineError> {
    cfg.validate()?;
    if experts.len() != cfg.colony.ants {
        return Err(EngineError::InvalidConfig {
            reason: format!(
                "colony wants {} ants but {} experts were supplied",
                cfg.colony.ants,
                experts.len()
            ),
        });
    }

    let ledger = CallLedger::new();
    let counting_embedder = CountingEmbedder::new(embedder, &ledger);
    let mut ph = PheromoneMatrix::new(g, cfg.colony.tau0, cfg.colony.tau_min)
        .map_err(|e| EngineError::InvalidConfig {
            reason: e.to_string(),
        })?;

    let mut history: Vec<IterationMetrics> = Vec::new();
    let mut converged = false;

    for t in 1..=cfg.max_iterations {
        let abort = |cause: AbortCause, history: &mut Vec<IterationMetrics>| EngineError::Aborted {
            iteration: t,
            source: cause,
            history: std::mem::take(history),
        };

        // Construction phase: ants walk concurrently against the frozen
        // matrix, each with an RNG stream derived from (seed, t, ant).
        let walks: Vec<Result<Path, ColonyError>> = experts
            .par_iter()
            .enumerate()
            .map(|(k, expert)| {
                let counting = CountingExpert::new(*expert, &ledger);
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.colony.seed);
                rng.set_stream(((t as u64) << 32) | k as u64);
                construct_path(g, &ph, &counting, &cfg.colony, &mut rng)
            })
            .collect();
        let mut paths = Vec::with_capacity(walks.len());
        for walk in walks {
            match walk {
                Ok(p) => paths.push(p),
                Err(e) => return Err(abort(e.into(), &mut history)),
            }
        }

        // Scoring phase: identical paths share one quality evaluation.
        let mut quality_of: HashMap<&Path, f64> = HashMap::new();
        for path in &paths {
            if quality_of.contains_key(path) {
                continue;
            }
            let counting_experts: Vec<CountingExpert> = experts
                .iter()
                .map(|e| CountingExpert::new(*e, &ledger))
                .collect();
            let expert_refs: Vec<&dyn ExpertProvider> = counting_experts
                .iter()
                .map(|e| e as &dyn ExpertProvider)
                .collect();
            let q = match quality(path, g, &cfg.weights, &counting_embedder, &expert_refs) {
                Ok(q) => q.total,
                Err(e) => return Err(abort(e.into(), &mut history)),
            };
            quality_of.insert(path, q);
        }
        let qualities: Vec<f64> = paths.iter().map(|p| quality_of[p]).collect();

        // Update phase: evaporation strictly before deposits.
        if let Err(e) = ph.evaporate(cfg.colony.rho) {
            return Err(abort(e.into(), &mut history));
        }
        if let Err(e) = ph.deposit(&paths, &qualities, &cfg.colony) {
            return Err(abort(e.into(), &mut history));
        }

        let best_path = extract_best_path(g, &ph);
        let metrics = build_metrics(t, paths, qualities, best_path, &ph, ledger.snapshot().total);
        history.push(metrics);

        if check_convergence(&history, cfg.convergence_window) {
            converged = true;
            break;
        }
    }

    let last = history.last().expect("at least one iteration ran");
    let best_path = last.best_path.clone();
    let best_chain = g
        .chain_texts(&best_path)
        .expect("extracted path stays within the graph");
    let iterations_run = history.len();
    Ok(RunOutput {
        result: RunResult {
            best_path,
            best_chain,
            iterations_run,
            converged,
            history,
        },
        pheromones: ph,
        calls: ledger.snapshot(),
    })
}

fn build_metrics(
    iteration: usize,
    paths: Vec<Path>,
    qualities: Vec<f64>,
    best_path: Path,
    ph: &PheromoneMatrix,
    cumulative_calls: u64,
) -> IterationMetrics {
    let ants = paths.len();
    let best_quality = qualities.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean_path_length =
        paths.iter().map(|p| p.thought_count() as f64).sum::<f64>() / ants as f64;

    // Modal path: highest count, ties to the lexicographically smallest
    // node sequence.
    let mut counts: HashMap<&Path, usize> = HashMap::new();
    for p in &paths {
        *counts.entry(p).or_insert(0) += 1;
    }
    let modal = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(p, c)| ((*p).clone(), *c))
        .expect("at least one path per iteration");
    let agreement_rate = modal.1 as f64 / ants as f64;
    let path_diversity = counts.len() as f64 / ants as f64;

    let concentration_ratio = concentration_ratio(ph, &best_path);

    IterationMetrics {
        iteration,
        paths,
        qualities,
        best_quality,
        mean_path_length,
        agreement_rate,
        path_diversity,
        concentration_ratio,
        best_path,
        cumulative_calls,
    }
}

/// Mean pheromone on the path's edges divided by the mean over all other
/// edges; 1.0 when the path covers every edge.
pub fn concentration_ratio(ph: &PheromoneMatrix, path: &Path) -> f64 {
    let on_edges: std::collections::HashSet<(NodeId, NodeId)> = path.edges().collect();
    let (mut on_sum, mut on_n, mut off_sum, mut off_n) = (0.0, 0usize, 0.0, 0usize);
    for (edge, tau) in ph.iter() {
        if on_edges.contains(&edge) {
            on_sum += tau;
            on_n += 1;
        } else {
            off_sum += tau;
            off_n += 1;
        }
    }
    if on_n == 0 || off_n == 0 {
        return 1.0;
    }
    (on_sum / on_n as f64) / (off_sum / off_n as f64)
}

/// Greedy walk from `s0` following the highest-pheromone edge at every node;
/// ties go to the smallest successor id.
pub fn extract_best_path(g: &ReasoningGraph, ph: &PheromoneMatrix) -> Path {
    let mut nodes = vec![g.s0()];
    let mut current = g.s0();
    while current != g.sf() {
        let succ = g
            .successors(current)
            .expect("pheromone matrix is bound to this graph");
        let mut best = succ[0];
        let mut best_tau = ph.level(current, best).unwrap_or(0.0);
        for &j in &succ[1..] {
            let tau = ph.level(current, j).unwrap_or(0.0);
            if tau > best_tau {
                best = j;
                best_tau = tau;
            }
        }
        nodes.push(best);
        current = best;
    }
    Path::new(nodes)
}

/// True when the last `window` extracted best paths are identical.
pub fn check_convergence(history: &[IterationMetrics], window: usize) -> bool {
    if window == 0 || history.len() < window {
        return false;
    }
    let tail = &history[history.len() - window..];
    tail.windows(2).all(|w| w[0].best_path == w[1].best_path)
}

/// The call-volume model: `ants * per_path_evals * iterations` heuristic
/// calls plus the tree-generation overhead.
pub fn predicted_call_count(
    ants: u64,
    per_path_evals: f64,
    iterations: u64,
    tree_calls: u64,
) -> f64 {
    (ants * iterations) as f64 * per_path_evals + tree_calls as f64
}

/// Geometric tree-generation overhead: `sum of n^i for i in 1..=d` calls for
/// a full tree of depth `d` and branching `n`.
pub fn tree_generation_calls(depth: u32, branching: u64) -> u64 {
    (1..=depth)
        .map(|i| branching.saturating_pow(i))
        .fold(0u64, u64::saturating_add)
}
