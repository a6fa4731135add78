//! Synthetic planted-optimum benchmark instances and the exhaustive oracle
//! used as ground truth for the stochastic search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{augment, NodeId, Path, ReasoningGraph, ThoughtTree};
use crate::providers::mock::PlantedExpert;
use crate::providers::{Embedder, ExpertProvider, ExpertRole};
use crate::scoring::{quality, QualityWeights, ScoringError};

/// Hard cap on the number of root-to-leaf paths an instance may have; keeps
/// exhaustive enumeration cheap.
pub const PATH_CAP: u128 = 100_000;

/// Parameters of one synthetic instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Seed for texts, the planted route, and expert noise.
    pub seed: u64,
    /// Tree depth; leaves sit at this layer.
    pub depth: usize,
    /// Children per internal node.
    pub branching: usize,
    /// Score gap between planted and decoy steps, in (0, 1].
    pub separation: f64,
    /// Expert noise amplitude.
    pub noise: f64,
    /// Number of planted experts to build.
    #[serde(default = "default_experts")]
    pub experts: usize,
}

fn default_experts() -> usize {
    5
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.depth == 0 || self.branching == 0 {
            return Err(SynthError::Invalid {
                reason: "depth and branching must be at least 1".into(),
            });
        }
        if self.experts == 0 {
            return Err(SynthError::Invalid {
                reason: "at least one expert is required".into(),
            });
        }
        if !(self.separation > 0.0 && self.separation <= 1.0) {
            return Err(SynthError::Invalid {
                reason: format!("separation must lie in (0, 1], got {}", self.separation),
            });
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(SynthError::Invalid {
                reason: format!("noise must be a finite value >= 0, got {}", self.noise),
            });
        }
        let paths = (self.branching as u128).checked_pow(self.depth as u32);
        match paths {
            Some(p) if p <= PATH_CAP => Ok(()),
            _ => Err(SynthError::CapExceeded {
                count: paths.unwrap_or(u128::MAX),
                cap: PATH_CAP,
            }),
        }
    }

    /// Whether the score gap dominates the noise enough for the planted path
    /// to be unambiguous.
    pub fn is_well_separated(&self) -> bool {
        self.separation > 2.0 * self.noise
    }
}

/// Errors raised by instance generation and enumeration.
#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {reason}")]
    Invalid { reason: String },
    #[error("{count} paths exceed the enumeration cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("provider error: {0}")]
    Provider(#[from] crate::providers::ProviderError),
}

/// One generated instance: the graph, the planted path, and the experts that
/// favor it.
#[derive(Debug, Clone)]
pub struct SynthInstance {
    pub spec: SynthSpec,
    pub graph: ReasoningGraph,
    pub planted: Path,
    pub experts: Vec<PlantedExpert>,
}

impl SynthInstance {
    pub fn expert_refs(&self) -> Vec<&dyn ExpertProvider> {
        self.experts.iter().map(|e| e as &dyn ExpertProvider).collect()
    }

    /// Noise-free copies of the experts, for oracle evaluation.
    pub fn quiet_experts(&self) -> Vec<PlantedExpert> {
        self.experts.iter().map(PlantedExpert::without_noise).collect()
    }
}

/// Builds a full `branching`-ary tree of depth `depth` with exactly one
/// planted root-to-leaf path, augments it, and derives the experts.
///
/// Planted thoughts repeat a shared pair of anchor tokens so the planted
/// chain is also the most coherent one under the hash embedder; decoys get
/// fresh tokens at every node. Identical seeds reproduce identical
/// instances.
pub fn generate(spec: &SynthSpec) -> Result<SynthInstance, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Planted thoughts repeat this token bundle, so consecutive planted
    // states stay nearly parallel under bag-of-words hashing.
    let anchor = format!(
        "anchor{:04x} theme{:04x} motif{:04x} focus{:04x} core{:04x}",
        rng.gen::<u16>(),
        rng.gen::<u16>(),
        rng.gen::<u16>(),
        rng.gen::<u16>(),
        rng.gen::<u16>()
    );
    // Child slot taken by the planted path at each layer below the root.
    let planted_slots: Vec<usize> = (0..spec.depth)
        .map(|_| rng.gen_range(0..spec.branching))
        .collect();

    let problem = format!("synthetic reasoning task {:08x}", spec.seed);
    let mut tree = ThoughtTree::new(problem);
    let root_text = format!("{anchor} start task{:04x}", spec.seed & 0xffff);
    let root = tree.add_root(root_text.clone());
    let mut planted_texts = vec![root_text];

    // Breadth-first construction; (arena index, planted?) per frontier node.
    let mut frontier = vec![(root, true)];
    let mut uniq = 0u64;
    for d in 1..=spec.depth {
        let mut next = Vec::with_capacity(frontier.len() * spec.branching);
        for &(node, node_planted) in &frontier {
            for slot in 0..spec.branching {
                let planted = node_planted && slot == planted_slots[d - 1];
                uniq += 1;
                let text = if planted {
                    format!("{anchor} step{d}")
                } else {
                    format!(
                        "alt{:06x} path{:06x} turn{:06x} step{d} off{uniq:06}",
                        rng.gen::<u32>() & 0xff_ffff,
                        rng.gen::<u32>() & 0xff_ffff,
                        rng.gen::<u32>() & 0xff_ffff
                    )
                };
                let child = tree.add_child(node, text.clone());
                if planted {
                    planted_texts.push(text);
                }
                next.push((child, planted));
            }
        }
        frontier = next;
    }

    let graph = augment(&tree)?;
    let planted = find_path_by_texts(&graph, &planted_texts)?;

    // Decoy steps read as unpromising (base 0.1); the planted step sits the
    // full separation above. With beta = 2 this gives experts real steering
    // power from the first iteration.
    let miss = (1.0 - spec.separation).clamp(crate::providers::mock::SCORE_FLOOR, 0.1);
    let hit = (miss + spec.separation).min(1.0);
    let experts = (0..spec.experts)
        .map(|k| {
            PlantedExpert::new(
                planted_texts.iter().cloned(),
                hit,
                miss,
                spec.noise,
                spec.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)),
                ExpertRole::ALL[k % ExpertRole::ALL.len()],
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(SynthInstance {
        spec: *spec,
        graph,
        planted,
        experts,
    })
}

/// Follows the unique chain of the given texts from `s0` down to `sf`.
fn find_path_by_texts(g: &ReasoningGraph, texts: &[String]) -> Result<Path, SynthError> {
    let mut nodes = vec![g.s0()];
    let mut current = g.s0();
    for (i, want) in texts.iter().enumerate() {
        let next = g
            .successors(current)?
            .iter()
            .copied()
            .find(|&j| g.node(j).map(|t| &t.text == want).unwrap_or(false))
            .ok_or_else(|| SynthError::Invalid {
                reason: format!("planted text missing at step {i}"),
            })?;
        nodes.push(next);
        current = next;
    }
    nodes.push(g.sf());
    Ok(Path::new(nodes))
}

/// Enumerates every `s0 -> sf` path in deterministic (lexicographic) order.
pub fn enumerate_paths(g: &ReasoningGraph) -> Result<Vec<Path>, SynthError> {
    let mut paths = Vec::new();
    // Iterative DFS; successor lists are ascending, so output order is the
    // lexicographic order of node-id sequences.
    let mut stack: Vec<(NodeId, usize)> = vec![(g.s0(), 0)];
    let mut walk = vec![g.s0()];
    while let Some(&(node, next_child)) = stack.last() {
        let succ = g.successors(node)?;
        if node == g.sf() || next_child >= succ.len() {
            if node == g.sf() {
                paths.push(Path::new(walk.clone()));
                if paths.len() as u128 > PATH_CAP {
                    return Err(SynthError::CapExceeded {
                        count: paths.len() as u128,
                        cap: PATH_CAP,
                    });
                }
            }
            stack.pop();
            walk.pop();
            continue;
        }
        stack.last_mut().expect("stack is non-empty").1 += 1;
        let child = succ[next_child];
        stack.push((child, 0));
        walk.push(child);
    }
    Ok(paths)
}

/// Scores every path exhaustively and returns the argmax with its quality.
/// Exact ties go to the lexicographically smallest node-id sequence.
pub fn oracle_best(
    g: &ReasoningGraph,
    weights: &QualityWeights,
    embedder: &dyn Embedder,
    experts: &[&dyn ExpertProvider],
) -> Result<(Path, f64), SynthError> {
    let paths = enumerate_paths(g)?;
    let mut best: Option<(Path, f64)> = None;
    for path in paths {
        let q = quality(&path, g, weights, embedder, experts)?.total;
        // Strictly-greater keeps the first (lexicographically smallest) path
        // on exact ties.
        match &best {
            Some((_, best_q)) if q <= *best_q => {}
            _ => best = Some((path, q)),
        }
    }
    best.ok_or(SynthError::Invalid {
        reason: "graph has no complete paths".into(),
    })
}
