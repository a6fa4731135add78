//! Provider interfaces for the three external capabilities the search needs:
//! thought generation, expert assessment, and text embedding.
//!
//! Deterministic mock implementations live in [`mock`]; HTTP-backed
//! implementations speaking the common chat-completion protocol live in
//! [`http`]. All providers must be callable from multiple threads at once.

pub mod http;
pub mod mock;

use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::graph::ReasoningState;

/// Errors surfaced by provider implementations.
#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("http request failed after {attempts} attempt(s){}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Http {
        message: String,
        status: Option<u16>,
        attempts: u32,
    },
    #[error("could not parse provider reply: {message}")]
    Parse { message: String },
    #[error("{what} is not supported by this provider")]
    Unsupported { what: String },
    #[error("invalid provider configuration: {message}")]
    InvalidConfig { message: String },
}

/// Specialization label attached to each expert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpertRole {
    Mathematical,
    Scientific,
    Logical,
    CommonSense,
    DomainSpecific,
}

impl ExpertRole {
    /// The five roles in their canonical order; cycled when more experts are
    /// requested than roles exist.
    pub const ALL: [ExpertRole; 5] = [
        ExpertRole::Mathematical,
        ExpertRole::Scientific,
        ExpertRole::Logical,
        ExpertRole::CommonSense,
        ExpertRole::DomainSpecific,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExpertRole::Mathematical => "mathematical",
            ExpertRole::Scientific => "scientific",
            ExpertRole::Logical => "logical",
            ExpertRole::CommonSense => "common-sense",
            ExpertRole::DomainSpecific => "domain-specific",
        }
    }
}

impl std::fmt::Display for ExpertRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExpertRole {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExpertRole::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| ProviderError::InvalidConfig {
                message: format!("unknown expert role {s:?}"),
            })
    }
}

/// Proposes candidate next thoughts for a partial reasoning chain.
pub trait ThoughtGenerator: Send + Sync {
    /// Returns up to `max_branches` distinct candidate next steps.
    fn generate(
        &self,
        problem: &str,
        steps_so_far: &[String],
        max_branches: usize,
    ) -> Result<Vec<String>, ProviderError>;

    /// Produces a final answer from a finished chain. Optional capability.
    fn final_answer(&self, problem: &str, chain: &[String]) -> Result<String, ProviderError> {
        let _ = (problem, chain);
        Err(ProviderError::Unsupported {
            what: "final answer generation".into(),
        })
    }
}

/// One specialized scorer: rates candidate steps during path construction and
/// complete chains afterwards.
pub trait ExpertProvider: Send + Sync {
    fn role(&self) -> ExpertRole;

    /// How promising `candidate` looks as the next step from `state`, in
    /// `[h_floor, 1]`.
    fn heuristic(&self, state: &ReasoningState, candidate: &str) -> Result<f64, ProviderError>;

    /// Overall quality of a complete chain, in `[0, 1]`.
    fn score_path(&self, problem: &str, chain: &[String]) -> Result<f64, ProviderError>;
}

/// Maps text to a fixed-dimension real vector.
pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError>;
}

/// Thread-safe running totals of provider invocations, by category.
#[derive(Debug, Default)]
pub struct CallLedger {
    generate: AtomicU64,
    heuristic: AtomicU64,
    score: AtomicU64,
    embed: AtomicU64,
}

impl CallLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_generate(&self) {
        self.generate.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_heuristic(&self) {
        self.heuristic.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_score(&self) {
        self.score.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_embed(&self) {
        self.embed.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CallCounts {
        let generate = self.generate.load(Ordering::Relaxed);
        let heuristic = self.heuristic.load(Ordering::Relaxed);
        let score = self.score.load(Ordering::Relaxed);
        let embed = self.embed.load(Ordering::Relaxed);
        CallCounts {
            generate,
            heuristic,
            score,
            embed,
            total: generate + heuristic + score + embed,
        }
    }
}

/// Plain snapshot of a [`CallLedger`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounts {
    pub generate: u64,
    pub heuristic: u64,
    pub score: u64,
    pub embed: u64,
    pub total: u64,
}

/// Generator wrapper that records every call in a ledger.
pub struct CountingGenerator<'a> {
    inner: &'a dyn ThoughtGenerator,
    ledger: &'a CallLedger,
}

impl<'a> CountingGenerator<'a> {
    pub fn new(inner: &'a dyn ThoughtGenerator, ledger: &'a CallLedger) -> Self {
        CountingGenerator { inner, ledger }
    }
}

impl ThoughtGenerator for CountingGenerator<'_> {
    fn generate(
        &self,
        problem: &str,
        steps_so_far: &[String],
        max_branches: usize,
    ) -> Result<Vec<String>, ProviderError> {
        self.ledger.record_generate();
        self.inner.generate(problem, steps_so_far, max_branches)
    }

    fn final_answer(&self, problem: &str, chain: &[String]) -> Result<String, ProviderError> {
        self.ledger.record_generate();
        self.inner.final_answer(problem, chain)
    }
}

/// Expert wrapper that records every call in a ledger.
pub struct CountingExpert<'a> {
    inner: &'a dyn ExpertProvider,
    ledger: &'a CallLedger,
}

impl<'a> CountingExpert<'a> {
    pub fn new(inner: &'a dyn ExpertProvider, ledger: &'a CallLedger) -> Self {
        CountingExpert { inner, ledger }
    }
}

impl ExpertProvider for CountingExpert<'_> {
    fn role(&self) -> ExpertRole {
        self.inner.role()
    }

    fn heuristic(&self, state: &ReasoningState, candidate: &str) -> Result<f64, ProviderError> {
        self.ledger.record_heuristic();
        self.inner.heuristic(state, candidate)
    }

    fn score_path(&self, problem: &str, chain: &[String]) -> Result<f64, ProviderError> {
        self.ledger.record_score();
        self.inner.score_path(problem, chain)
    }
}

/// Embedder wrapper that records every call in a ledger.
pub struct CountingEmbedder<'a> {
    inner: &'a dyn Embedder,
    ledger: &'a CallLedger,
}

impl<'a> CountingEmbedder<'a> {
    pub fn new(inner: &'a dyn Embedder, ledger: &'a CallLedger) -> Self {
        CountingEmbedder { inner, ledger }
    }
}

impl Embedder for CountingEmbedder<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        self.ledger.record_embed();
        self.inner.embed(text)
    }
}

/// FNV-1a 64-bit hash, the stable hash behind every deterministic provider.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hashes a list of string parts with length framing so that distinct part
/// boundaries cannot collide.
pub(crate) fn hash_parts(seed: u64, parts: &[&str]) -> u64 {
    let mut buf = Vec::with_capacity(16 + parts.iter().map(|p| p.len() + 8).sum::<usize>());
    buf.extend_from_slice(&seed.to_le_bytes());
    for p in parts {
        buf.extend_from_slice(&(p.len() as u64).to_le_bytes());
        buf.extend_from_slice(p.as_bytes());
    }
    fnv1a(&buf)
}

/// Maps a hash to a uniform draw in `[0, 1)`.
pub(crate) fn hash_unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}
