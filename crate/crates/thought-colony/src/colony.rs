//! Pheromone state and ant behavior: the transition rule, seeded sampling,
//! path construction, and the evaporate/deposit update.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, Path, ReasoningGraph, ReasoningState};
use crate::providers::{ExpertProvider, ProviderError};

/// All colony tunables. Defaults follow the reference configuration:
/// five ants, alpha 1, beta 2, evaporation 0.1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColonyConfig {
    /// Number of ants (one per expert).
    #[serde(alias = "m")]
    pub ants: usize,
    /// Pheromone exponent.
    pub alpha: f64,
    /// Heuristic exponent.
    pub beta: f64,
    /// Evaporation rate, in (0, 1).
    pub rho: f64,
    /// Initial pheromone level on every edge.
    pub tau0: f64,
    /// Positivity floor for pheromone levels.
    pub tau_min: f64,
    /// Floor applied to every heuristic value before the transition rule.
    pub h_floor: f64,
    /// RNG seed for ant sampling.
    pub seed: u64,
    /// When set, the iteration's best ant deposits a second time.
    pub elitism: bool,
    /// When set, negative path qualities deposit nothing.
    pub deposit_clamp: bool,
}

impl Default for ColonyConfig {
    fn default() -> Self {
        ColonyConfig {
            ants: 5,
            alpha: 1.0,
            beta: 2.0,
            rho: 0.1,
            tau0: 1.0,
            tau_min: 1e-4,
            h_floor: 1e-6,
            seed: 0,
            elitism: false,
            deposit_clamp: true,
        }
    }
}

impl ColonyConfig {
    pub fn validate(&self) -> Result<(), ColonyError> {
        let fail = |reason: String| Err(ColonyError::InvalidConfig { reason });
        if self.ants == 0 {
            return fail("ants must be at least 1".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be a finite value >= 0, got {}", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return fail(format!("beta must be a finite value >= 0, got {}", self.beta));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return fail(format!("rho must lie in (0, 1), got {}", self.rho));
        }
        if !(self.tau_min > 0.0 && self.tau0 >= self.tau_min) {
            return fail(format!(
                "need tau0 >= tau_min > 0, got tau0={} tau_min={}",
                self.tau0, self.tau_min
            ));
        }
        if !self.h_floor.is_finite() || self.h_floor <= 0.0 {
            return fail(format!("h_floor must be positive, got {}", self.h_floor));
        }
        Ok(())
    }
}

/// Errors raised by colony operations.
#[derive(Debug, thiserror::Error)]
pub enum ColonyError {
    #[error("invalid colony configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("node {0} has no successors to transition to")]
    SinkNode(NodeId),
    #[error("transition weights overflowed to a non-finite value")]
    NumericOverflow,
    #[error("edge {0}->{1} is not part of the bound graph")]
    UnknownEdge(NodeId, NodeId),
    #[error("deposit needs one quality per path: {paths} paths, {qualities} qualities, {ants} ants")]
    LengthMismatch {
        paths: usize,
        qualities: usize,
        ants: usize,
    },
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error("expert provider failed: {0}")]
    Provider(#[from] ProviderError),
}

/// Per-edge pheromone levels bound to one graph's edge set.
///
/// Levels never drop below `tau_min`. Safe to hand to other threads; updates
/// happen in an exclusive phase between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneMatrix {
    tau: BTreeMap<(NodeId, NodeId), f64>,
    tau0: f64,
    tau_min: f64,
}

impl PheromoneMatrix {
    /// Initializes every edge of `g` at `tau0`.
    pub fn new(g: &ReasoningGraph, tau0: f64, tau_min: f64) -> Result<Self, ColonyError> {
        if !(tau_min > 0.0 && tau0 >= tau_min) {
            return Err(ColonyError::InvalidConfig {
                reason: format!("need tau0 >= tau_min > 0, got tau0={tau0} tau_min={tau_min}"),
            });
        }
        Ok(PheromoneMatrix {
            tau: g.edges().map(|e| (e, tau0)).collect(),
            tau0,
            tau_min,
        })
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn level(&self, i: NodeId, j: NodeId) -> Result<f64, ColonyError> {
        self.tau
            .get(&(i, j))
            .copied()
            .ok_or(ColonyError::UnknownEdge(i, j))
    }

    /// Overrides one edge level (floored at `tau_min`).
    pub fn set_level(&mut self, i: NodeId, j: NodeId, value: f64) -> Result<(), ColonyError> {
        match self.tau.get_mut(&(i, j)) {
            Some(slot) => {
                *slot = value.max(self.tau_min);
                Ok(())
            }
            None => Err(ColonyError::UnknownEdge(i, j)),
        }
    }

    /// Edge levels in ascending edge order.
    pub fn iter(&self) -> impl Iterator<Item = ((NodeId, NodeId), f64)> + '_ {
        self.tau.iter().map(|(&e, &v)| (e, v))
    }

    pub fn edge_count(&self) -> usize {
        self.tau.len()
    }

    /// Multiplies every level by `1 - rho`, flooring at `tau_min`.
    pub fn evaporate(&mut self, rho: f64) -> Result<(), ColonyError> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(ColonyError::InvalidConfig {
                reason: format!("rho must lie in (0, 1), got {rho}"),
            });
        }
        let floor = self.tau_min;
        for v in self.tau.values_mut() {
            *v = (*v * (1.0 - rho)).max(floor);
        }
        Ok(())
    }

    /// Adds each ant's path quality onto the edges of its path. Edges shared
    /// by several ants receive the sum. With `deposit_clamp` set, negative
    /// qualities deposit nothing; with `elitism` set, the iteration's best
    /// ant (ties to the lowest index) deposits once more.
    pub fn deposit(
        &mut self,
        paths: &[Path],
        qualities: &[f64],
        cfg: &ColonyConfig,
    ) -> Result<(), ColonyError> {
        if paths.len() != qualities.len() || paths.len() != cfg.ants {
            return Err(ColonyError::LengthMismatch {
                paths: paths.len(),
                qualities: qualities.len(),
                ants: cfg.ants,
            });
        }
        let mut delta: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
        let add_path = |path: &Path, q: f64, delta: &mut BTreeMap<(NodeId, NodeId), f64>| {
            let amount = if cfg.deposit_clamp { q.max(0.0) } else { q };
            for edge in path.edges() {
                *delta.entry(edge).or_insert(0.0) += amount;
            }
        };
        for (path, &q) in paths.iter().zip(qualities) {
            add_path(path, q, &mut delta);
        }
        if cfg.elitism {
            // Strictly-greater comparison: ties go to the lowest ant index.
            let mut best = 0;
            for k in 1..paths.len() {
                if qualities[k] > qualities[best] {
                    best = k;
                }
            }
            add_path(&paths[best], qualities[best], &mut delta);
        }
        for (edge, d) in delta {
            match self.tau.get_mut(&edge) {
                Some(slot) => *slot = (*slot + d).max(self.tau_min),
                None => return Err(ColonyError::UnknownEdge(edge.0, edge.1)),
            }
        }
        Ok(())
    }

    /// Snapshot keyed `"i->j"`, for export and inspection.
    pub fn snapshot(&self) -> BTreeMap<String, f64> {
        self.tau
            .iter()
            .map(|(&(i, j), &v)| (format!("{i}->{j}"), v))
            .collect()
    }
}

/// A normalized distribution over the successors of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionDistribution {
    items: Vec<(NodeId, f64)>,
}

impl TransitionDistribution {
    pub fn items(&self) -> &[(NodeId, f64)] {
        &self.items
    }

    pub fn probability_of(&self, node: NodeId) -> Option<f64> {
        self.items.iter().find(|(n, _)| *n == node).map(|(_, p)| *p)
    }

    /// Inverse-CDF sample with a single uniform draw.
    pub fn sample(&self, rng: &mut impl Rng) -> NodeId {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(node, p) in &self.items {
            acc += p;
            if u < acc {
                return node;
            }
        }
        self.items.last().expect("distribution is non-empty").0
    }
}

/// Normalizes `tau^alpha * h^beta` over parallel weight slices.
///
/// Powers are computed directly when they stay finite and normal, which keeps
/// simple cases bit-exact; otherwise the computation falls back to log space
/// so large exponents cannot overflow.
pub fn transition_weights(
    taus: &[f64],
    heuristics: &[f64],
    alpha: f64,
    beta: f64,
) -> Result<Vec<f64>, ColonyError> {
    assert_eq!(taus.len(), heuristics.len());
    assert!(!taus.is_empty());
    let direct: Vec<f64> = taus
        .iter()
        .zip(heuristics)
        .map(|(&t, &h)| t.powf(alpha) * h.powf(beta))
        .collect();
    let sum: f64 = direct.iter().sum();
    if direct.iter().all(|w| w.is_finite()) && sum.is_normal() {
        return Ok(direct.iter().map(|w| w / sum).collect());
    }
    // Log-space fallback: softmax over alpha*ln(tau) + beta*ln(h).
    let logs: Vec<f64> = taus
        .iter()
        .zip(heuristics)
        .map(|(&t, &h)| alpha * t.ln() + beta * h.ln())
        .collect();
    if logs.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
        return Err(ColonyError::NumericOverflow);
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(ColonyError::NumericOverflow);
    }
    let exps: Vec<f64> = logs.iter().map(|l| (l - max).exp().max(1e-300)).collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.iter().map(|e| e / z).collect())
}

/// The ant transition rule: probability of moving from `i` to each successor
/// `j`, proportional to `tau_ij^alpha * h_j^beta`. Heuristic values are
/// floored at `cfg.h_floor`, so all probabilities are strictly positive.
pub fn transition_probabilities(
    g: &ReasoningGraph,
    ph: &PheromoneMatrix,
    i: NodeId,
    heuristics: &BTreeMap<NodeId, f64>,
    cfg: &ColonyConfig,
) -> Result<TransitionDistribution, ColonyError> {
    let succ = g.successors(i)?;
    if succ.is_empty() {
        return Err(ColonyError::SinkNode(i));
    }
    let taus: Vec<f64> = succ
        .iter()
        .map(|&j| ph.level(i, j))
        .collect::<Result<_, _>>()?;
    let hs: Vec<f64> = succ
        .iter()
        .map(|&j| heuristics.get(&j).copied().unwrap_or(cfg.h_floor).max(cfg.h_floor))
        .collect();
    let probs = transition_weights(&taus, &hs, cfg.alpha, cfg.beta)?;
    Ok(TransitionDistribution {
        items: succ.iter().copied().zip(probs).collect(),
    })
}

/// Draws a successor from a transition distribution. Identical seed and
/// distribution always give the identical node.
pub fn sample_next_state(dist: &TransitionDistribution, rng: &mut impl Rng) -> NodeId {
    dist.sample(rng)
}

/// Walks one ant from `s0` to `sf`.
///
/// At every node the expert is asked for one heuristic per successor (the
/// per-call accounting other components rely on), then the transition rule
/// picks the next node.
pub fn construct_path(
    g: &ReasoningGraph,
    ph: &PheromoneMatrix,
    expert: &dyn ExpertProvider,
    cfg: &ColonyConfig,
    rng: &mut impl Rng,
) -> Result<Path, ColonyError> {
    let mut nodes = vec![g.s0()];
    let mut chain: Vec<String> = Vec::new();
    let mut current = g.s0();
    while current != g.sf() {
        let succ = g.successors(current)?;
        if succ.is_empty() {
            return Err(ColonyError::SinkNode(current));
        }
        let state = ReasoningState {
            problem: g.problem().to_string(),
            chain: chain.clone(),
        };
        let mut heuristics = BTreeMap::new();
        for &j in succ {
            let candidate = &g.node(j)?.text;
            let h = expert.heuristic(&state, candidate)?;
            heuristics.insert(j, h.max(cfg.h_floor));
        }
        let dist = transition_probabilities(g, ph, current, &heuristics, cfg)?;
        let next = dist.sample(rng);
        if !g.is_sentinel(next) {
            chain.push(g.node(next)?.text.clone());
        }
        nodes.push(next);
        current = next;
    }
    Ok(Path::new(nodes))
}
