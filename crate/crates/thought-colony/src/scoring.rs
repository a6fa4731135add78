//! Path quality: the weighted combination of semantic coherence, length
//! penalty, and mixture-of-experts agreement.

use serde::{Deserialize, Serialize};

use crate::graph::{Path, ReasoningGraph};
use crate::providers::{Embedder, ExpertProvider, ProviderError};

/// Weights of the three quality components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QualityWeights {
    /// Coherence weight.
    pub w1: f64,
    /// Length-penalty weight.
    pub w2: f64,
    /// Mixture-of-experts weight.
    pub w3: f64,
}

impl Default for QualityWeights {
    fn default() -> Self {
        QualityWeights {
            w1: 0.4,
            w2: 0.3,
            w3: 0.3,
        }
    }
}

impl QualityWeights {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Self {
        QualityWeights { w1, w2, w3 }
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        let ok = [self.w1, self.w2, self.w3]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0);
        if !ok || self.w1 + self.w2 + self.w3 <= 0.0 {
            return Err(ScoringError::InvalidWeights {
                w1: self.w1,
                w2: self.w2,
                w3: self.w3,
            });
        }
        Ok(())
    }
}

/// The scored decomposition of one complete path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathQuality {
    /// Mean consecutive-state cosine similarity, in [0, 1].
    pub coherence: f64,
    /// `-ln(thought count)`, always <= 0.
    pub length_penalty: f64,
    /// Mean expert path score, in [0, 1].
    pub moe: f64,
    /// `w1*C + w2*L + w3*M`.
    pub total: f64,
}

/// Errors raised while scoring paths.
#[derive(Debug, thiserror::Error)]
pub enum ScoringError {
    #[error("quality weights must be non-negative with a positive sum, got ({w1}, {w2}, {w3})")]
    InvalidWeights { w1: f64, w2: f64, w3: f64 },
    #[error("path is not a complete s0->sf walk of the graph")]
    IncompletePath,
    #[error("state embedding at step {index} has zero norm")]
    ZeroVector { index: usize },
    #[error("expert returned a path score outside [0, 1]: {value}")]
    OutOfRangeScore { value: f64 },
    #[error("no experts supplied")]
    NoExperts,
    #[error("embedder failed: {0}")]
    Embedder(#[source] ProviderError),
    #[error("expert provider failed: {0}")]
    Expert(#[source] ProviderError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// Cosine similarity; `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some(dot / (na * nb))
    }
}

/// Mean cosine similarity between the embeddings of consecutive states along
/// the path, each similarity clamped into [0, 1].
///
/// The state at thought `i` is the problem text plus the chain up to and
/// including `i`; sentinel nodes contribute no state. Paths with fewer than
/// two thoughts are perfectly coherent by definition.
pub fn coherence(
    path: &Path,
    g: &ReasoningGraph,
    embedder: &dyn Embedder,
) -> Result<f64, ScoringError> {
    let chain = g.chain_texts(path)?;
    if chain.len() < 2 {
        return Ok(1.0);
    }
    let mut state = g.problem().to_string();
    let mut embeddings = Vec::with_capacity(chain.len());
    for text in &chain {
        state.push('\n');
        state.push_str(text);
        embeddings.push(embedder.embed(&state).map_err(ScoringError::Embedder)?);
    }
    let mut sum = 0.0;
    for (i, pair) in embeddings.windows(2).enumerate() {
        let cos = cosine(&pair[0], &pair[1]).ok_or(ScoringError::ZeroVector { index: i })?;
        sum += cos.clamp(0.0, 1.0);
    }
    Ok(sum / (chain.len() - 1) as f64)
}

/// `-ln(|P|)` where `|P|` counts the real thoughts on the path.
pub fn length_penalty(path: &Path) -> f64 {
    let count = path.thought_count().max(1);
    -((count as f64).ln())
}

/// Mean expert score of the complete chain. Every expert must answer within
/// [0, 1].
pub fn moe_score(
    path: &Path,
    g: &ReasoningGraph,
    experts: &[&dyn ExpertProvider],
) -> Result<f64, ScoringError> {
    if experts.is_empty() {
        return Err(ScoringError::NoExperts);
    }
    let chain = g.chain_texts(path)?;
    let mut sum = 0.0;
    for expert in experts {
        let score = expert
            .score_path(g.problem(), &chain)
            .map_err(ScoringError::Expert)?;
        if !score.is_finite() || !(0.0..=1.0).contains(&score) {
            return Err(ScoringError::OutOfRangeScore { value: score });
        }
        sum += score;
    }
    Ok(sum / experts.len() as f64)
}

/// Computes all three components and their weighted total for one complete
/// path.
pub fn quality(
    path: &Path,
    g: &ReasoningGraph,
    weights: &QualityWeights,
    embedder: &dyn Embedder,
    experts: &[&dyn ExpertProvider],
) -> Result<PathQuality, ScoringError> {
    weights.validate()?;
    if !g.is_complete_path(path) {
        return Err(ScoringError::IncompletePath);
    }
    let c = coherence(path, g, embedder)?;
    let l = length_penalty(path);
    let m = moe_score(path, g, experts)?;
    Ok(PathQuality {
        coherence: c,
        length_penalty: l,
        moe: m,
        total: weights.w1 * c + weights.w2 * l + weights.w3 * m,
    })
}
