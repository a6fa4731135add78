//! Deterministic providers for tests, benchmarks, and offline runs.
//!
//! Every implementation here is a pure function of its inputs and a seed:
//! the same call always returns the same value, regardless of call order or
//! thread interleaving.

use std::collections::HashSet;

use crate::graph::{normalize_text, ReasoningState};

use super::{
    hash_parts, hash_unit, Embedder, ExpertProvider, ExpertRole, ProviderError, ThoughtGenerator,
};

/// Floor applied to heuristic-style scores by deterministic providers. Keeps
/// every transition probability strictly positive.
pub const SCORE_FLOOR: f64 = 1e-6;

/// Generator that expands any node into `max_branches` synthetic thoughts.
///
/// Thought texts are keyed on the problem, the full step chain, and the
/// branch index, so different parents always receive distinct children while
/// repeated calls stay identical.
#[derive(Debug, Clone)]
pub struct MockGenerator {
    seed: u64,
    width: Option<usize>,
}

impl MockGenerator {
    pub fn new(seed: u64) -> Self {
        MockGenerator { seed, width: None }
    }

    /// Caps how many thoughts this generator offers per expansion; the
    /// effective count is `min(width, max_branches)`.
    pub fn with_width(mut self, width: usize) -> Self {
        self.width = Some(width);
        self
    }
}

impl ThoughtGenerator for MockGenerator {
    fn generate(
        &self,
        problem: &str,
        steps_so_far: &[String],
        max_branches: usize,
    ) -> Result<Vec<String>, ProviderError> {
        let count = self.width.map_or(max_branches, |w| w.min(max_branches));
        let depth = steps_so_far.len() + 1;
        let joined = steps_so_far.join("\u{1f}");
        let thoughts = (0..count)
            .map(|i| {
                let h = hash_parts(
                    self.seed,
                    &[problem, &joined, &depth.to_string(), &i.to_string()],
                );
                format!("step{depth} option{} v{:08x}", i + 1, h & 0xffff_ffff)
            })
            .collect();
        Ok(thoughts)
    }

    fn final_answer(&self, problem: &str, chain: &[String]) -> Result<String, ProviderError> {
        let joined = chain.join("\u{1f}");
        let h = hash_parts(self.seed, &["answer", problem, &joined]);
        Ok(format!("answer {:08x}", h & 0xffff_ffff))
    }
}

/// Expert whose scores are uniform hash draws in `[0.1, 0.9]`. Useful when a
/// run needs experts but no planted structure exists.
#[derive(Debug, Clone)]
pub struct MockExpert {
    seed: u64,
    role: ExpertRole,
}

impl MockExpert {
    pub fn new(seed: u64, role: ExpertRole) -> Self {
        MockExpert { seed, role }
    }
}

impl ExpertProvider for MockExpert {
    fn role(&self) -> ExpertRole {
        self.role
    }

    fn heuristic(&self, state: &ReasoningState, candidate: &str) -> Result<f64, ProviderError> {
        let joined = state.chain.join("\u{1f}");
        let h = hash_parts(self.seed, &["heuristic", &state.problem, &joined, candidate]);
        Ok(0.1 + 0.8 * hash_unit(h))
    }

    fn score_path(&self, problem: &str, chain: &[String]) -> Result<f64, ProviderError> {
        let joined = chain.join("\u{1f}");
        let h = hash_parts(self.seed, &["score", problem, &joined]);
        Ok(0.1 + 0.8 * hash_unit(h))
    }
}

/// Test double that favors a planted set of thought texts.
///
/// Heuristics return `hit_score` for planted candidates and `miss_score`
/// otherwise; path scores return `hit_score` only when every thought on the
/// chain is planted. A zero-mean perturbation bounded by `noise` is added,
/// derived by hashing the call inputs with this expert's seed, so outputs
/// stay pure functions of their arguments.
#[derive(Debug, Clone)]
pub struct PlantedExpert {
    planted: HashSet<String>,
    hit_score: f64,
    miss_score: f64,
    noise: f64,
    seed: u64,
    role: ExpertRole,
}

impl PlantedExpert {
    pub fn new(
        planted: impl IntoIterator<Item = String>,
        hit_score: f64,
        miss_score: f64,
        noise: f64,
        seed: u64,
        role: ExpertRole,
    ) -> Result<Self, ProviderError> {
        let ordered = hit_score.is_finite()
            && miss_score.is_finite()
            && hit_score > miss_score
            && miss_score >= SCORE_FLOOR
            && hit_score <= 1.0;
        if !ordered {
            return Err(ProviderError::InvalidConfig {
                message: format!(
                    "planted expert needs 1 >= hit_score > miss_score >= {SCORE_FLOOR}, \
                     got hit={hit_score} miss={miss_score}"
                ),
            });
        }
        if !(0.0..=1.0).contains(&noise) {
            return Err(ProviderError::InvalidConfig {
                message: format!("noise amplitude {noise} outside [0, 1]"),
            });
        }
        Ok(PlantedExpert {
            planted: planted.into_iter().map(|t| normalize_text(&t)).collect(),
            hit_score,
            miss_score,
            noise,
            seed,
            role,
        })
    }

    /// Copy of this expert with the noise amplitude set to zero; used for
    /// oracle evaluation.
    pub fn without_noise(&self) -> Self {
        let mut copy = self.clone();
        copy.noise = 0.0;
        copy
    }

    pub fn noise_amplitude(&self) -> f64 {
        self.noise
    }

    pub fn is_planted(&self, text: &str) -> bool {
        self.planted.contains(&normalize_text(text))
    }

    fn perturb(&self, base: f64, h: u64) -> f64 {
        let noisy = base + self.noise * (2.0 * hash_unit(h) - 1.0);
        noisy.clamp(SCORE_FLOOR, 1.0)
    }
}

impl ExpertProvider for PlantedExpert {
    fn role(&self) -> ExpertRole {
        self.role
    }

    fn heuristic(&self, state: &ReasoningState, candidate: &str) -> Result<f64, ProviderError> {
        let base = if self.is_planted(candidate) {
            self.hit_score
        } else {
            self.miss_score
        };
        let joined = state.chain.join("\u{1f}");
        let h = hash_parts(self.seed, &["heuristic", &state.problem, &joined, candidate]);
        Ok(self.perturb(base, h))
    }

    fn score_path(&self, problem: &str, chain: &[String]) -> Result<f64, ProviderError> {
        let all_planted = !chain.is_empty() && chain.iter().all(|t| self.is_planted(t));
        let base = if all_planted {
            self.hit_score
        } else {
            self.miss_score
        };
        let joined = chain.join("\u{1f}");
        let h = hash_parts(self.seed, &["score", problem, &joined]);
        Ok(self.perturb(base, h))
    }
}

/// Bag-of-words feature-hashing embedder.
///
/// Tokens are split on whitespace and hashed with FNV-1a; each occurrence
/// adds +/-1 (sign from the hash) to one of `dim` buckets, and the result is
/// L2-normalized. Raw cosines between such vectors lie in [-1, 1]. Empty
/// text maps to the unit basis vector `e0`; the same fallback covers the
/// rare full sign-cancellation, keeping the non-zero-norm contract.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 2, "embedding dimension must be at least 2");
        HashEmbedder { dim }
    }

    /// Bucket index and sign a token hashes to.
    pub fn token_slot(&self, token: &str) -> (usize, f64) {
        let h = super::fnv1a(token.as_bytes());
        let bucket = (h % self.dim as u64) as usize;
        let sign = if h & (1 << 63) != 0 { -1.0 } else { 1.0 };
        (bucket, sign)
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(256)
    }
}

impl Embedder for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let mut v = vec![0.0; self.dim];
        let mut any = false;
        for token in text.split_whitespace() {
            any = true;
            let (bucket, sign) = self.token_slot(token);
            v[bucket] += sign;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !any || norm == 0.0 {
            let mut e0 = vec![0.0; self.dim];
            e0[0] = 1.0;
            return Ok(e0);
        }
        for x in &mut v {
            *x /= norm;
        }
        Ok(v)
    }
}
